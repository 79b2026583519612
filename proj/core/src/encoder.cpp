#include "netlock/encoder.hpp"

#include <utility>

namespace netlock {

using sat::Lit;

void FormulaSink::add_clause(std::span<const Lit> c) {
  std::vector<int> out;
  out.reserve(c.size());
  for (auto l : c) out.push_back(dimacs(l));
  f_.add(std::move(out));
}

Encoder::Encoder(ClauseSink& sink) : sink_(sink), true_(Lit::make(sink.new_var())) {
  const Lit unit[] = {true_};
  sink_.add_clause(unit);
}

Lit Encoder::fresh() { return Lit::make(sink_.new_var()); }

Lit Encoder::make_and(Lit a, Lit b) {
  const Lit f = constant(false);
  const Lit t = constant(true);
  if (a == f || b == f || a == ~b) return f;
  if (a == t || a == b) return b;
  if (b == t) return a;
  if (b < a) std::swap(a, b);
  const auto key = (std::uint64_t{a.x} << 32) | b.x;
  if (auto it = and_.find(key); it != and_.end()) return it->second;
  const Lit y = fresh();
  const Lit c1[] = {~a, ~b, y};
  const Lit c2[] = {a, ~y};
  const Lit c3[] = {b, ~y};
  sink_.add_clause(c1);
  sink_.add_clause(c2);
  sink_.add_clause(c3);
  and_.emplace(key, y);
  return y;
}

Lit Encoder::make_xor(Lit a, Lit b) {
  bool flip = a.negated() != b.negated();
  a = Lit::make(a.var());
  b = Lit::make(b.var());
  if (a == b) return constant(flip);
  if (is_constant(a)) return b ^ !flip;
  if (is_constant(b)) return a ^ !flip;
  if (b < a) std::swap(a, b);
  const auto key = (std::uint64_t{a.x} << 32) | b.x;
  if (auto it = xor_.find(key); it != xor_.end()) return it->second ^ flip;
  const Lit y = fresh();
  const Lit c1[] = {~a, ~b, ~y};
  const Lit c2[] = {a, b, ~y};
  const Lit c3[] = {a, ~b, y};
  const Lit c4[] = {~a, b, y};
  sink_.add_clause(c1);
  sink_.add_clause(c2);
  sink_.add_clause(c3);
  sink_.add_clause(c4);
  xor_.emplace(key, y);
  return y ^ flip;
}

Lit Encoder::make_gate(GateKind kind, std::span<const Lit> in) {
  Lit acc = in[0];
  switch (kind) {
    case GateKind::And:
    case GateKind::Nand:
      for (std::size_t i = 1; i < in.size(); ++i) acc = make_and(acc, in[i]);
      return kind == GateKind::And ? acc : ~acc;
    case GateKind::Or:
    case GateKind::Nor:
      for (std::size_t i = 1; i < in.size(); ++i) acc = make_or(acc, in[i]);
      return kind == GateKind::Or ? acc : ~acc;
    case GateKind::Xor:
    case GateKind::Xnor:
      for (std::size_t i = 1; i < in.size(); ++i) acc = make_xor(acc, in[i]);
      return kind == GateKind::Xor ? acc : ~acc;
    case GateKind::Not:
      return ~acc;
    case GateKind::Buff:
      return acc;
  }
  return acc;
}

std::vector<Lit> Encoder::encode(const Netlist& n, std::span<const Lit> inputs) {
  if (inputs.size() != n.input_count()) throw Error("encoder: input literal count mismatch");
  std::vector<Lit> sig(n.signal_count());
  std::copy(inputs.begin(), inputs.end(), sig.begin());
  std::vector<Lit> in;
  for (std::size_t g = 0; g < n.gate_count(); ++g) {
    in.clear();
    for (auto s : n.gate_fanin(g)) in.push_back(sig[s]);
    sig[n.gate_output(g)] = make_gate(n.gates()[g].kind, in);
  }
  return sig;
}

std::vector<Lit> Encoder::outputs(const Netlist& n, const std::vector<Lit>& signals) {
  std::vector<Lit> out;
  out.reserve(n.output_ids().size());
  for (auto id : n.output_ids()) out.push_back(signals[id]);
  return out;
}

Lit Encoder::miter(std::span<const Lit> a, std::span<const Lit> b) {
  if (a.size() != b.size()) throw Error("miter: output count mismatch");
  Lit acc = constant(false);
  for (std::size_t i = 0; i < a.size(); ++i) acc = make_or(acc, make_xor(a[i], b[i]));
  return acc;
}

void Encoder::assert_lit(Lit l) {
  if (l == constant(true)) return;
  const Lit c[] = {l};
  sink_.add_clause(c);
}

}  // namespace netlock
