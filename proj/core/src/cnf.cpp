#include "netlock/cnf.hpp"

#include <sstream>

namespace netlock {

void CnfFormula::add(std::vector<int> clause) {
  if (clause.empty()) throw Error("empty clause");
  clauses.push_back(std::move(clause));
}

namespace {

void encode_gate(CnfFormula& f, GateKind kind, const std::vector<int>& in, int y) {
  switch (kind) {
    case GateKind::And:
    case GateKind::Nand: {
      const int out = kind == GateKind::And ? y : -y;
      std::vector<int> big;
      for (int a : in) big.push_back(-a);
      big.push_back(out);
      f.add(std::move(big));
      for (int a : in) f.add({a, -out});
      break;
    }
    case GateKind::Or:
    case GateKind::Nor: {
      const int out = kind == GateKind::Or ? y : -y;
      std::vector<int> big(in.begin(), in.end());
      big.push_back(-out);
      f.add(std::move(big));
      for (int a : in) f.add({-a, out});
      break;
    }
    case GateKind::Xor:
    case GateKind::Xnor: {
      const int out = kind == GateKind::Xor ? y : -y;
      const int a = in[0], b = in[1];
      f.add({-a, -b, -out});
      f.add({a, b, -out});
      f.add({a, -b, out});
      f.add({-a, b, out});
      break;
    }
    case GateKind::Not:
      f.add({in[0], y});
      f.add({-in[0], -y});
      break;
    case GateKind::Buff:
      f.add({-in[0], y});
      f.add({in[0], -y});
      break;
  }
}

}  // namespace

CnfFormula encode_cnf(const Netlist& n, int copies, bool shared_inputs) {
  if (copies != 1 && copies != 2) throw Error("encode_cnf supports 1 or 2 copies");
  CnfFormula f;
  const std::size_t pis = n.primary_inputs().size();
  f.signal_vars.assign(static_cast<std::size_t>(copies), std::vector<int>(n.signal_count(), 0));
  for (int c = 0; c < copies; ++c) {
    auto& vars = f.signal_vars[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < n.input_count(); ++i) {
      vars[i] = (c > 0 && shared_inputs && i < pis) ? f.signal_vars[0][i] : f.new_var();
    }
    for (std::size_t g = 0; g < n.gate_count(); ++g) vars[n.gate_output(g)] = f.new_var();
    std::vector<int> in;
    for (std::size_t g = 0; g < n.gate_count(); ++g) {
      in.clear();
      for (auto s : n.gate_fanin(g)) in.push_back(vars[s]);
      encode_gate(f, n.gates()[g].kind, in, vars[n.gate_output(g)]);
    }
  }
  for (std::size_t k = 0; k < n.key_inputs().size(); ++k) f.key_vars.push_back(f.signal_vars[0][pis + k]);
  return f;
}

void write_dimacs(std::ostream& os, const CnfFormula& f) {
  os << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) {
    for (int l : c) os << l << ' ';
    os << "0\n";
  }
}

std::string to_dimacs(const CnfFormula& f) {
  std::ostringstream os;
  write_dimacs(os, f);
  return os.str();
}

std::vector<sat::Var> load_cnf(sat::Solver& solver, const CnfFormula& f) {
  std::vector<sat::Var> vars(static_cast<std::size_t>(f.num_vars) + 1, 0);
  for (int v = 1; v <= f.num_vars; ++v) vars[static_cast<std::size_t>(v)] = solver.new_var();
  std::vector<sat::Lit> lits;
  for (const auto& c : f.clauses) {
    lits.clear();
    for (int l : c) lits.push_back(sat::Lit::make(vars[static_cast<std::size_t>(l > 0 ? l : -l)], l < 0));
    solver.add_clause(lits);
  }
  return vars;
}

}  // namespace netlock
