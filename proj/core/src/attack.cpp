#include "netlock/attack.hpp"

#include <chrono>

#include "netlock/encoder.hpp"
#include "netlock/sat_solver.hpp"
#include "netlock/simulator.hpp"

namespace netlock {

using sat::Lit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void require_same_outputs(const Netlist& a, const Netlist& b) {
  if (a.primary_outputs().size() != b.primary_outputs().size()) {
    throw Error("interface mismatch: " + std::to_string(a.primary_outputs().size()) + " vs " +
                std::to_string(b.primary_outputs().size()) + " primary outputs");
  }
}

std::vector<Lit> fresh_lits(Encoder& enc, std::size_t n) {
  std::vector<Lit> v(n);
  for (auto& l : v) l = enc.fresh();
  return v;
}

std::vector<Lit> concat(const std::vector<Lit>& a, const std::vector<Lit>& b) {
  std::vector<Lit> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

std::string_view to_string(AttackOutcome o) {
  switch (o) {
    case AttackOutcome::KeyRecovered: return "key_recovered";
    case AttackOutcome::BudgetExhausted: return "budget_exhausted";
    case AttackOutcome::Timeout: return "timeout";
  }
  return "?";
}

CecResult cec_check(const Netlist& a, const Netlist& b) {
  if (a.is_locked() || b.is_locked()) throw Error("cec_check: netlists must be key-free");
  const auto perm = input_permutation(a, b);
  require_same_outputs(a, b);

  auto solver = sat::make_solver();
  SolverSink sink(*solver);
  Encoder enc(sink);
  const auto x = fresh_lits(enc, a.primary_inputs().size());
  std::vector<Lit> xb(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) xb[i] = x[perm[i]];
  const auto oa = Encoder::outputs(a, enc.encode(a, x));
  const auto ob = Encoder::outputs(b, enc.encode(b, xb));
  const Lit diff = enc.miter(oa, ob);

  CecResult r;
  if (diff == enc.constant(false)) {
    r.equivalent = true;
    return r;
  }
  const Lit assume[] = {diff};
  const auto status = solver->solve(assume);
  if (status == sat::Result::Unknown) throw Error("cec_check: solver gave up");
  r.equivalent = status == sat::Result::Unsat;
  if (!r.equivalent) {
    for (auto l : x) r.counterexample.push_back(solver->model_value(l));
  }
  return r;
}

AttackReport dip_attack(const Netlist& locked, const Netlist& oracle, const AttackBudget& budget,
                        CnfFormula* constraints_out, std::uint64_t count_cap) {
  if (!locked.is_locked()) throw Error("dip_attack: netlist has no key inputs");
  if (oracle.is_locked()) throw Error("dip_attack: oracle must be key-free");
  const auto perm = input_permutation(oracle, locked);
  require_same_outputs(locked, oracle);

  const auto t0 = Clock::now();
  const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(budget.time_budget_s));
  AttackReport rep;
  rep.budget = budget;

  const std::size_t n_pi = locked.primary_inputs().size();
  const std::size_t n_key = locked.key_inputs().size();
  auto solver = sat::make_solver();
  solver->set_deadline(deadline);
  SolverSink sink(*solver);
  Encoder enc(sink);
  const auto x = fresh_lits(enc, n_pi);
  const auto k1 = fresh_lits(enc, n_key);
  const auto k2 = fresh_lits(enc, n_key);
  const auto o1 = Encoder::outputs(locked, enc.encode(locked, concat(x, k1)));
  const auto o2 = Encoder::outputs(locked, enc.encode(locked, concat(x, k2)));
  const Lit diff = enc.miter(o1, o2);

  CnfFormula constraints;
  FormulaSink csink(constraints);
  Encoder cenc(csink);
  const auto kc = fresh_lits(cenc, n_key);
  for (auto l : kc) constraints.key_vars.push_back(FormulaSink::dimacs(l));

  const Simulator oracle_sim(oracle);
  auto timed_solve = [&](std::span<const Lit> assume) {
    const auto s0 = Clock::now();
    const auto r = solver->solve(assume);
    rep.solver_time_s += seconds_since(s0);
    return r;
  };

  bool converged = false;
  for (;;) {
    if (Clock::now() >= deadline) break;
    sat::Result r = sat::Result::Unsat;
    if (diff != enc.constant(false)) {
      const Lit assume[] = {diff};
      r = timed_solve(assume);
    }
    if (r == sat::Result::Unknown) break;
    if (r == sat::Result::Unsat) {
      converged = true;
      break;
    }
    if (rep.dips.size() >= budget.dip_budget) break;

    std::vector<bool> dip(n_pi);
    for (std::size_t i = 0; i < n_pi; ++i) dip[i] = solver->model_value(x[i]);
    PatternBlock q(n_pi, 1);
    for (std::size_t i = 0; i < n_pi; ++i) q.set_bit(perm[i], 0, dip[i]);
    const auto ans = oracle_sim.run(q);
    std::vector<bool> y(ans.rows());
    for (std::size_t o = 0; o < y.size(); ++o) y[o] = ans.bit(o, 0);

    std::vector<Lit> xc(n_pi);
    for (std::size_t i = 0; i < n_pi; ++i) xc[i] = enc.constant(dip[i]);
    for (const auto* keys : {&k1, &k2}) {
      const auto outs = Encoder::outputs(locked, enc.encode(locked, concat(xc, *keys)));
      for (std::size_t o = 0; o < outs.size(); ++o) enc.assert_lit(outs[o] ^ !y[o]);
    }
    std::vector<Lit> xcc(n_pi);
    for (std::size_t i = 0; i < n_pi; ++i) xcc[i] = cenc.constant(dip[i]);
    const auto couts = Encoder::outputs(locked, cenc.encode(locked, concat(xcc, kc)));
    for (std::size_t o = 0; o < couts.size(); ++o) cenc.assert_lit(couts[o] ^ !y[o]);

    rep.dips.push_back(std::move(dip));
    rep.responses.push_back(std::move(y));
  }
  rep.dip_count = rep.dips.size();

  if (converged) {
    const auto r = timed_solve({});
    if (r == sat::Result::Unsat) throw Error("dip_attack: DIP constraints admit no key (oracle/netlist mismatch)");
    if (r == sat::Result::Sat) {
      std::vector<bool> bits(n_key);
      for (std::size_t i = 0; i < n_key; ++i) bits[i] = solver->model_value(k1[i]);
      KeyVector key(std::move(bits));
      if (!cec_check(bind_key(locked, key), oracle).equivalent) {
        throw Error("dip_attack: recovered key " + key.to_string() + " failed equivalence check");
      }
      rep.recovered_key = std::move(key);
      rep.verified = true;
      rep.outcome = AttackOutcome::KeyRecovered;
    } else {
      rep.outcome = AttackOutcome::Timeout;
    }
  } else {
    rep.outcome = rep.dips.size() >= budget.dip_budget && Clock::now() < deadline ? AttackOutcome::BudgetExhausted
                                                                                  : AttackOutcome::Timeout;
  }
  rep.remaining_keys = count_remaining_keys(constraints, count_cap);
  rep.wall_time_s = seconds_since(t0);
  if (constraints_out) *constraints_out = std::move(constraints);
  return rep;
}

std::vector<KeyVector> enumerate_keys(const Netlist& locked, const Netlist& oracle) {
  const std::size_t width = locked.key_inputs().size();
  if (width == 0) throw Error("enumerate_keys: netlist has no key inputs");
  if (width > kEnumerationWidthLimit) {
    throw Error("enumerate_keys: key width " + std::to_string(width) + " exceeds the limit of " +
                std::to_string(kEnumerationWidthLimit));
  }
  const auto perm = input_permutation(oracle, locked);
  require_same_outputs(locked, oracle);
  const std::size_t n_pi = locked.primary_inputs().size();
  std::vector<KeyVector> found;
  const std::uint64_t total = std::uint64_t{1} << width;

  if (n_pi <= kExhaustiveInputLimit) {
    const auto pats = exhaustive_patterns(n_pi);
    const std::size_t valid = std::size_t{1} << n_pi;
    PatternBlock oq(n_pi, pats.words());
    for (std::size_t i = 0; i < n_pi; ++i) {
      auto src = pats.row(i);
      std::copy(src.begin(), src.end(), oq.row(perm[i]).begin());
    }
    const auto ref = Simulator(oracle).run(oq);
    const Simulator sim(locked);
    PatternBlock in(n_pi + width, pats.words());
    for (std::size_t i = 0; i < n_pi; ++i) {
      auto src = pats.row(i);
      std::copy(src.begin(), src.end(), in.row(i).begin());
    }
    for (std::uint64_t v = 0; v < total; ++v) {
      for (std::size_t b = 0; b < width; ++b) {
        auto row = in.row(n_pi + b);
        std::fill(row.begin(), row.end(), ((v >> b) & 1U) ? ~std::uint64_t{0} : 0);
      }
      const auto got = sim.run(in);
      bool same = true;
      for (std::size_t o = 0; o < ref.rows() && same; ++o) {
        for (std::size_t w = 0; w < ref.words() && same; ++w) {
          std::uint64_t d = ref.row(o)[w] ^ got.row(o)[w];
          if (valid < (w + 1) * 64) d &= (std::uint64_t{1} << (valid - w * 64)) - 1;
          same = d == 0;
        }
      }
      if (same) found.push_back(KeyVector::from_uint(v, width));
    }
    return found;
  }
  for (std::uint64_t v = 0; v < total; ++v) {
    auto key = KeyVector::from_uint(v, width);
    if (cec_check(bind_key(locked, key), oracle).equivalent) found.push_back(std::move(key));
  }
  return found;
}

RemainingKeys count_remaining_keys(const CnfFormula& f, std::uint64_t cap) {
  if (cap == 0) throw Error("count_remaining_keys: cap must be positive");
  std::vector<bool> used(static_cast<std::size_t>(f.num_vars) + 1, false);
  for (const auto& c : f.clauses)
    for (int l : c) used[static_cast<std::size_t>(l > 0 ? l : -l)] = true;
  std::vector<int> constrained;
  std::size_t free_bits = 0;
  for (int v : f.key_vars) {
    if (used[static_cast<std::size_t>(v)]) {
      constrained.push_back(v);
    } else {
      ++free_bits;
    }
  }
  const std::uint64_t mult = free_bits >= 63 ? 0 : (std::uint64_t{1} << free_bits);  // 0: overflow

  auto solver = sat::make_solver();
  const auto vars = load_cnf(*solver, f);
  std::uint64_t models = 0;
  std::vector<Lit> block;
  for (;;) {
    const auto r = solver->solve();
    if (r == sat::Result::Unknown) throw Error("count_remaining_keys: solver gave up");
    if (r == sat::Result::Unsat) break;
    ++models;
    if (mult == 0 || mult > cap || models > cap / mult) return {cap, false};
    if (constrained.empty()) break;
    block.clear();
    for (int v : constrained) {
      const auto sv = vars[static_cast<std::size_t>(v)];
      block.push_back(Lit::make(sv, solver->model_value(sv)));
    }
    if (!solver->add_clause(block)) break;
  }
  return {models * (mult == 0 ? 1 : mult), true};
}

std::string bits_to_string(const std::vector<bool>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (bool b : bits) s.push_back(b ? '1' : '0');
  return s;
}

nlohmann::json to_json(const RemainingKeys& r) { return {{"count", r.count}, {"exact", r.exact}}; }

nlohmann::json to_json(const AttackReport& r) {
  nlohmann::json dips = nlohmann::json::array();
  for (const auto& d : r.dips) dips.push_back(bits_to_string(d));
  return {{"outcome", to_string(r.outcome)},
          {"recovered_key", r.recovered_key ? nlohmann::json(r.recovered_key->to_string()) : nlohmann::json()},
          {"verified", r.verified},
          {"dip_count", r.dip_count},
          {"dips", std::move(dips)},
          {"solver_time_s", r.solver_time_s},
          {"wall_time_s", r.wall_time_s},
          {"remaining_keys", to_json(r.remaining_keys)},
          {"budget", {{"dip_budget", r.budget.dip_budget}, {"time_budget_s", r.budget.time_budget_s}}}};
}

}  // namespace netlock
