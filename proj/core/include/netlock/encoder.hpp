// Structurally hashed circuit-to-CNF encoder. Gates are decomposed into
// two-input AND/XOR nodes with complemented edges; constants are folded and
// identical nodes are shared, so repeated encodings of the same logic (the
// two halves of a miter, constant-input DIP copies) cost little.

#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "netlock/cnf.hpp"
#include "netlock/netlist.hpp"
#include "netlock/sat_solver.hpp"

namespace netlock {

class ClauseSink {
 public:
  virtual ~ClauseSink() = default;
  virtual sat::Var new_var() = 0;
  virtual void add_clause(std::span<const sat::Lit> clause) = 0;
};

class SolverSink final : public ClauseSink {
 public:
  explicit SolverSink(sat::Solver& s) : s_(s) {}
  sat::Var new_var() override { return s_.new_var(); }
  void add_clause(std::span<const sat::Lit> c) override { s_.add_clause(c); }

 private:
  sat::Solver& s_;
};

/// Writes into a CnfFormula; solver variable v is DIMACS variable v + 1.
class FormulaSink final : public ClauseSink {
 public:
  explicit FormulaSink(CnfFormula& f) : f_(f) {}
  sat::Var new_var() override { return static_cast<sat::Var>(f_.new_var() - 1); }
  void add_clause(std::span<const sat::Lit> c) override;
  static int dimacs(sat::Lit l) { return (l.negated() ? -1 : 1) * static_cast<int>(l.var() + 1); }

 private:
  CnfFormula& f_;
};

class Encoder {
 public:
  explicit Encoder(ClauseSink& sink);

  sat::Lit constant(bool v) const { return true_ ^ !v; }
  bool is_constant(sat::Lit l) const { return l.var() == true_.var(); }
  sat::Lit fresh();

  sat::Lit make_and(sat::Lit a, sat::Lit b);
  sat::Lit make_or(sat::Lit a, sat::Lit b) { return ~make_and(~a, ~b); }
  sat::Lit make_xor(sat::Lit a, sat::Lit b);
  sat::Lit make_gate(GateKind kind, std::span<const sat::Lit> fanin);

  /// Literal for every signal of `netlist`; `inputs` holds primary inputs
  /// followed by key inputs.
  std::vector<sat::Lit> encode(const Netlist& netlist, std::span<const sat::Lit> inputs);
  static std::vector<sat::Lit> outputs(const Netlist& netlist, const std::vector<sat::Lit>& signals);

  /// OR over pairwise XORs of `a` and `b`.
  sat::Lit miter(std::span<const sat::Lit> a, std::span<const sat::Lit> b);
  /// Adds the unit clause l (constant false makes the sink unsatisfiable).
  void assert_lit(sat::Lit l);

  std::size_t node_count() const { return and_.size() + xor_.size(); }

 private:
  ClauseSink& sink_;
  sat::Lit true_;
  std::unordered_map<std::uint64_t, sat::Lit> and_;
  std::unordered_map<std::uint64_t, sat::Lit> xor_;
};

}  // namespace netlock
