// Incremental SAT back end: a CDCL solver (two watched literals, VSIDS,
// first-UIP learning with recursive minimization, Luby restarts, phase
// saving, LBD-based clause-database reduction) behind a small interface.

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace netlock::sat {

using Var = std::uint32_t;

struct Lit {
  std::uint32_t x = 0;  // 2 * var + negated

  static Lit make(Var v, bool negated = false) { return Lit{2 * v + (negated ? 1U : 0U)}; }
  Var var() const { return x >> 1; }
  bool negated() const { return x & 1U; }
  Lit operator~() const { return Lit{x ^ 1U}; }
  Lit operator^(bool flip) const { return Lit{x ^ (flip ? 1U : 0U)}; }
  auto operator<=>(const Lit&) const = default;
};

enum class Result { Sat, Unsat, Unknown };

using Clock = std::chrono::steady_clock;

struct SolverStats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learnts = 0;
};

/// Generic incremental CNF interface.
class Solver {
 public:
  virtual ~Solver() = default;

  virtual Var new_var() = 0;
  virtual std::size_t num_vars() const = 0;
  /// Returns false once the clause set is unsatisfiable at the top level.
  virtual bool add_clause(std::span<const Lit> clause) = 0;
  bool add_clause(std::initializer_list<Lit> clause) { return add_clause(std::span<const Lit>(clause.begin(), clause.size())); }
  /// Unknown when the deadline passes first.
  virtual Result solve(std::span<const Lit> assumptions = {}) = 0;
  /// Value of `v` in the last satisfying assignment.
  virtual bool model_value(Var v) const = 0;
  bool model_value(Lit l) const { return model_value(l.var()) != l.negated(); }
  virtual void set_deadline(std::optional<Clock::time_point> deadline) = 0;
  virtual SolverStats stats() const = 0;
};

std::unique_ptr<Solver> make_solver();

}  // namespace netlock::sat
