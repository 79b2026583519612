#include "doctest.h"
#include "netlock/attack.hpp"
#include "netlock/bench_io.hpp"
#include "netlock/cnf.hpp"
#include "netlock/compiler.hpp"
#include "netlock/encoder.hpp"
#include "netlock/sat_solver.hpp"
#include "oracle.hpp"

using namespace netlock;

namespace {

using Clauses = std::vector<std::vector<int>>;

bool brute_sat(int nv, const Clauses& cs) {
  for (std::uint64_t m = 0; m < (1ULL << nv); ++m) {
    bool all = true;
    for (const auto& c : cs) {
      bool any = false;
      for (int l : c) any |= (((m >> (std::abs(l) - 1)) & 1) != 0) == (l > 0);
      if (!any) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

bool model_satisfies(const sat::Solver& s, const std::vector<sat::Var>& v, const Clauses& cs) {
  for (const auto& c : cs) {
    bool any = false;
    for (int l : c) any |= s.model_value(v[std::abs(l)]) == (l > 0);
    if (!any) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("solver: random 3-SAT against brute force") {
  std::mt19937_64 rng(17);
  int sat_count = 0;
  for (int t = 0; t < 300; ++t) {
    int nv = 4 + rng() % 9;
    int nc = nv * (3 + rng() % 3);
    Clauses cs;
    for (int c = 0; c < nc; ++c) {
      std::vector<int> cl;
      for (int k = 0; k < 3; ++k) cl.push_back((1 + int(rng() % nv)) * (rng() & 1 ? 1 : -1));
      cs.push_back(cl);
    }
    auto s = sat::make_solver();
    std::vector<sat::Var> v(nv + 1);
    for (int i = 1; i <= nv; ++i) v[i] = s->new_var();
    for (const auto& c : cs) {
      std::vector<sat::Lit> lits;
      for (int l : c) lits.push_back(sat::Lit::make(v[std::abs(l)], l < 0));
      s->add_clause(lits);
    }
    auto r = s->solve();
    bool expect = brute_sat(nv, cs);
    CHECK((r == sat::Result::Sat) == expect);
    if (r == sat::Result::Sat) {
      ++sat_count;
      CHECK(model_satisfies(*s, v, cs));
    }
  }
  CHECK(sat_count > 0);
}

TEST_CASE("solver: assumptions and incremental clauses") {
  auto s = sat::make_solver();
  auto a = s->new_var(), b = s->new_var();
  s->add_clause({sat::Lit::make(a, false), sat::Lit::make(b, false)});
  CHECK(s->solve(std::vector<sat::Lit>{sat::Lit::make(a, true)}) == sat::Result::Sat);
  CHECK(s->model_value(b));
  CHECK(s->solve(std::vector<sat::Lit>{sat::Lit::make(a, true), sat::Lit::make(b, true)}) == sat::Result::Unsat);
  CHECK(s->solve() == sat::Result::Sat);
  s->add_clause({sat::Lit::make(a, true)});
  s->add_clause({sat::Lit::make(b, true)});
  CHECK(s->solve() == sat::Result::Unsat);
}

TEST_CASE("solver: pigeonhole is unsat") {
  // 6 pigeons, 5 holes.
  auto s = sat::make_solver();
  const int P = 6, H = 5;
  std::vector<std::vector<sat::Var>> x(P, std::vector<sat::Var>(H));
  for (auto& row : x)
    for (auto& v : row) v = s->new_var();
  for (int p = 0; p < P; ++p) {
    std::vector<sat::Lit> c;
    for (int h = 0; h < H; ++h) c.push_back(sat::Lit::make(x[p][h], false));
    s->add_clause(c);
  }
  for (int h = 0; h < H; ++h)
    for (int p = 0; p < P; ++p)
      for (int q = p + 1; q < P; ++q) s->add_clause({sat::Lit::make(x[p][h], true), sat::Lit::make(x[q][h], true)});
  CHECK(s->solve() == sat::Result::Unsat);
}

TEST_CASE("cnf: single AND gate clauses") {
  auto n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
  auto f = encode_cnf(n);
  CHECK(f.num_vars == 3);
  REQUIRE(f.clauses.size() == 3);
  CHECK(f.clauses[0] == std::vector<int>{-1, -2, 3});
  CHECK(f.clauses[1] == std::vector<int>{1, -3});
  CHECK(f.clauses[2] == std::vector<int>{2, -3});
  auto d = to_dimacs(f);
  CHECK(d.rfind("p cnf 3 3\n", 0) == 0);
}

TEST_CASE("cnf: fixed inputs force exactly the simulated outputs") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 40; ++t) {
    auto n = oracle::random_circuit(rng, 5, 20, 3);
    auto f = encode_cnf(n);
    for (std::uint64_t x = 0; x < 32; x += 1 + rng() % 5) {
      auto xb = oracle::bits_of(x, 5);
      auto ref = oracle::scalar_eval(n, xb);
      auto s = sat::make_solver();
      auto v = load_cnf(*s, f);
      std::vector<sat::Lit> as;
      for (std::size_t i = 0; i < 5; ++i) as.push_back(sat::Lit::make(v[f.signal_vars[0][i]], !xb[i]));
      REQUIRE(s->solve(as) == sat::Result::Sat);
      for (std::size_t o = 0; o < 3; ++o)
        CHECK(s->model_value(v[f.signal_vars[0][n.output_ids()[o]]]) == ref[o]);
      for (std::size_t o = 0; o < 3; ++o) {
        auto lit = sat::Lit::make(v[f.signal_vars[0][n.output_ids()[o]]], false);
        // The opposite value is infeasible.
        auto flipped = as;
        flipped.push_back(lit ^ ref[o]);
        CHECK(s->solve(flipped) == sat::Result::Unsat);
      }
    }
  }
}

TEST_CASE("cnf: two copies with equal keys force equal outputs") {
  auto n = parse_bench("# key=10\nINPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nINPUT(keyinput1)\nOUTPUT(y)\n"
                       "t = XNOR(a, keyinput0)\ny = AND(t, b, keyinput1)\n");
  auto f = encode_cnf(n, 2, true);
  REQUIRE(f.signal_vars.size() == 2);
  CHECK(f.signal_vars[0][0] == f.signal_vars[1][0]);
  CHECK(f.signal_vars[0][2] != f.signal_vars[1][2]);
  auto s = sat::make_solver();
  auto v = load_cnf(*s, f);
  for (int k = 0; k < 2; ++k)
    for (bool neg : {false, true}) {
      s->add_clause({sat::Lit::make(v[f.signal_vars[0][2 + k]], neg), sat::Lit::make(v[f.signal_vars[1][2 + k]], !neg)});
    }
  auto y = n.output_ids()[0];
  std::vector<sat::Lit> diff = {sat::Lit::make(v[f.signal_vars[0][y]], false), sat::Lit::make(v[f.signal_vars[1][y]], true)};
  CHECK(s->solve(diff) == sat::Result::Unsat);
}

TEST_CASE("encoder: hashed encoding agrees with the scalar model") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 40; ++t) {
    auto n = oracle::random_circuit(rng, 5, 20, 3);
    CnfFormula f;
    FormulaSink sink(f);
    Encoder e(sink);
    std::vector<sat::Lit> in;
    for (int i = 0; i < 5; ++i) in.push_back(e.fresh());
    auto sig = e.encode(n, in);
    auto outs = Encoder::outputs(n, sig);
    auto x = rng() % 32;
    auto xb = oracle::bits_of(x, 5);
    auto ref = oracle::scalar_eval(n, xb);
    auto s = sat::make_solver();
    auto v = load_cnf(*s, f);
    auto map = [&](sat::Lit l) { return sat::Lit::make(v[l.var() + 1], l.negated()); };
    std::vector<sat::Lit> as;
    for (int i = 0; i < 5; ++i) as.push_back(map(in[i]) ^ !xb[i]);
    REQUIRE(s->solve(as) == sat::Result::Sat);
    for (std::size_t o = 0; o < outs.size(); ++o) CHECK(s->model_value(map(outs[o])) == ref[o]);
  }
}

TEST_CASE("encoder: structural hashing and folding") {
  auto s = sat::make_solver();
  SolverSink sink(*s);
  Encoder e(sink);
  auto a = e.fresh(), b = e.fresh();
  CHECK(e.make_and(a, b) == e.make_and(b, a));
  CHECK(e.make_and(a, e.constant(false)) == e.constant(false));
  CHECK(e.make_and(a, e.constant(true)) == a);
  CHECK(e.make_and(a, ~a) == e.constant(false));
  CHECK(e.make_xor(a, a) == e.constant(false));
  CHECK(e.make_xor(a, ~b) == ~e.make_xor(a, b));
  CHECK(e.is_constant(e.constant(true)));
}

TEST_CASE("cec: equivalences and counterexamples") {
  auto c17 = read_bench_file(oracle::iscas("c17"));
  CHECK(cec_check(c17, c17).equivalent);
  auto a = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
  auto o = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = OR(a, b)\n");
  auto r = cec_check(a, o);
  CHECK_FALSE(r.equivalent);
  REQUIRE(r.counterexample.size() == 2);
  CHECK(r.counterexample[0] != r.counterexample[1]);
  CHECK(oracle::scalar_eval(a, r.counterexample) != oracle::scalar_eval(o, r.counterexample));

  LockPlan p;
  p.source_circuit = "c17";
  p.key_width = 2;
  p.instances = {{LockStyle::XorXnor, {"16"}, {0}, {true}, {}}, {LockStyle::MuxLock, {"19"}, {1}, {false}, {{"10", true}}}};
  auto l = compile_plan(c17, p);
  CHECK(cec_check(bind_key(l, p.correct_key()), c17).equivalent);
  CHECK_FALSE(cec_check(bind_key(l, KeyVector::from_string("01")), c17).equivalent);
}

TEST_CASE("cec: random circuits match exhaustive comparison") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 60; ++t) {
    auto a = oracle::random_circuit(rng, 4, 6, 1);
    auto b = oracle::random_circuit(rng, 4, 6, 1);
    bool same = true;
    for (std::uint64_t x = 0; x < 16; ++x)
      same &= oracle::scalar_eval(a, oracle::bits_of(x, 4)) == oracle::scalar_eval(b, oracle::bits_of(x, 4));
    auto r = cec_check(a, b);
    CHECK(r.equivalent == same);
    if (!r.equivalent) CHECK(oracle::scalar_eval(a, r.counterexample) != oracle::scalar_eval(b, r.counterexample));
  }
}
