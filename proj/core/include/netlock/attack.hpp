// SAT-miter equivalence checking and the oracle-guided DIP key-recovery
// attack, with brute-force key enumeration and remaining-key counting.

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "netlock/cnf.hpp"
#include "netlock/netlist.hpp"

namespace netlock {

struct CecResult {
  bool equivalent = false;
  std::vector<bool> counterexample;  // primary inputs of `a`, in order; empty when equivalent
};

/// Both netlists must be key-free with the same primary-input names and
/// output count (outputs are compared positionally).
CecResult cec_check(const Netlist& a, const Netlist& b);

enum class AttackOutcome { KeyRecovered, BudgetExhausted, Timeout };
std::string_view to_string(AttackOutcome o);

struct AttackBudget {
  std::size_t dip_budget = 10000;
  double time_budget_s = 600.0;
};

struct RemainingKeys {
  std::uint64_t count = 0;
  bool exact = true;  // false: count is a lower bound (the cap was reached)
};

inline constexpr std::uint64_t kDefaultKeyCountCap = 65536;

struct AttackReport {
  AttackOutcome outcome = AttackOutcome::BudgetExhausted;
  std::optional<KeyVector> recovered_key;
  std::size_t dip_count = 0;
  std::vector<std::vector<bool>> dips;  // primary inputs of the locked netlist, in order
  std::vector<std::vector<bool>> responses;  // oracle outputs per DIP
  double solver_time_s = 0.0;
  double wall_time_s = 0.0;
  RemainingKeys remaining_keys;
  AttackBudget budget;
  bool verified = false;
};

/// Classic DIP loop on a two-copy shared-input miter. On convergence the key
/// is read from the copy-1 constraint system and checked with cec_check
/// (a failing check throws Error: it would mean an encoder bug).
/// `constraints`, when given, receives the copy-1 DIP constraint system over
/// the key variables (see count_remaining_keys).
AttackReport dip_attack(const Netlist& locked, const Netlist& oracle, const AttackBudget& budget = {},
                        CnfFormula* constraints = nullptr, std::uint64_t count_cap = kDefaultKeyCountCap);

inline constexpr std::size_t kEnumerationWidthLimit = 20;

/// Every key making `locked` functionally equal to `oracle`, in increasing
/// numeric order (bit i of the value is key bit i).
std::vector<KeyVector> enumerate_keys(const Netlist& locked, const Netlist& oracle);

/// Models of `constraints` projected onto its key variables. Key variables
/// that appear in no clause are counted analytically.
RemainingKeys count_remaining_keys(const CnfFormula& constraints, std::uint64_t cap = kDefaultKeyCountCap);

nlohmann::json to_json(const AttackReport& r);
nlohmann::json to_json(const RemainingKeys& r);
std::string bits_to_string(const std::vector<bool>& bits);

}  // namespace netlock
