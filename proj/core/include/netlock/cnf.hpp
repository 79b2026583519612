// Tseitin CNF encoding of netlists and DIMACS output.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "netlock/netlist.hpp"
#include "netlock/sat_solver.hpp"

namespace netlock {

/// Clauses use DIMACS literals: variable v >= 1 is `v`, its negation `-v`.
struct CnfFormula {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  /// signal_vars[copy][signal id]; 0 marks a signal with no variable.
  std::vector<std::vector<int>> signal_vars;
  /// Variables of the key inputs (copy 0), in key-bit order.
  std::vector<int> key_vars;

  int new_var() { return ++num_vars; }
  void add(std::vector<int> clause);
};

/// Plain Tseitin encoding, one variable per signal and copy. With two copies
/// and `shared_inputs`, primary-input variables are shared and key variables
/// are per copy. Clause order for AND(a, b) = y: (-a -b y) (a -y) (b -y).
CnfFormula encode_cnf(const Netlist& netlist, int copies = 1, bool shared_inputs = true);

void write_dimacs(std::ostream& os, const CnfFormula& f);
std::string to_dimacs(const CnfFormula& f);

/// Loads `f` into `solver`; returns solver variables indexed by DIMACS variable.
std::vector<sat::Var> load_cnf(sat::Solver& solver, const CnfFormula& f);

}  // namespace netlock
