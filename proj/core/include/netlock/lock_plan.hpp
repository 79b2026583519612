// Lock-plan intermediate representation (`lockplan_v1`).
//
// JSON layout:
//   { "version": "lockplan_v1", "source_circuit": "c432", "key_width": 8,
//     "seed": 7,
//     "instances": [ { "style": "xor_xnor", "targets": ["118"],
//                      "key_bits": [0], "correct_bits": [1], "helpers": [] },
//                    { "style": "perturb_restore", "targets": ["154"],
//                      "key_bits": [1, 2, 3, 4], "correct_bits": [0, 1, 1, 0],
//                      "helpers": [ {"signal": "21", "polarity": 1}, ... ] } ] }
//
// Unknown fields are rejected at every level.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "netlock/netlist.hpp"

namespace netlock {

inline constexpr std::string_view kLockPlanVersion = "lockplan_v1";
/// Reserved prefix for signals introduced by the lock compiler.
inline constexpr std::string_view kLockPrefix = "lk_";

enum class LockStyle : std::uint8_t { XorXnor, PerturbRestore, MuxLock, PairwiseSubgraph };

std::string_view to_string(LockStyle style);
std::optional<LockStyle> parse_lock_style(std::string_view text);
inline constexpr LockStyle kAllStyles[] = {LockStyle::XorXnor, LockStyle::MuxLock, LockStyle::PerturbRestore,
                                           LockStyle::PairwiseSubgraph};

struct HelperSignal {
  std::string signal;
  bool polarity = true;  // perturb_restore: detector literal is signal (1) or NOT signal (0)

  bool operator==(const HelperSignal&) const = default;
};

struct LockInstance {
  LockStyle style = LockStyle::XorXnor;
  std::vector<std::string> targets;
  std::vector<std::uint32_t> key_bits;
  std::vector<bool> correct_bits;
  std::vector<HelperSignal> helpers;  // perturb_restore detector inputs, or the mux_lock decoy

  bool operator==(const LockInstance&) const = default;
};

struct LockPlan {
  std::string source_circuit;
  std::uint32_t key_width = 0;
  std::uint64_t seed = 0;
  std::vector<LockInstance> instances;

  /// Correct key assembled from the instances' key-bit groups.
  KeyVector correct_key() const;
  /// True when the instances use more than one style.
  bool is_hybrid() const;

  bool operator==(const LockPlan&) const = default;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

/// Throws PlanError with a field-level message on schema or structural
/// (key-bit partition, duplicate target, per-style arity) violations.
LockPlan parse_plan(std::string_view text);
LockPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LockPlan& plan);
std::string serialize_plan(const LockPlan& plan);

/// Structural checks that need no netlist. Empty when the plan is well formed.
std::vector<std::string> check_plan_structure(const LockPlan& plan);

struct PlanBounds {
  std::size_t min_helpers = 1;
  std::size_t max_helpers = 8;
};

enum class PlanViolationKind {
  Structure,
  ReservedPrefix,
  LockedNetlist,
  UnknownSignal,
  InvalidTarget,
  HelperCount,
  CycleRisk,
};

std::string_view to_string(PlanViolationKind kind);

struct PlanViolation {
  PlanViolationKind kind;
  std::size_t instance;  // index into plan.instances, or SIZE_MAX for plan-level problems
  std::string subject;
  std::string message;
};

nlohmann::json to_json(const PlanViolation& v);
nlohmann::json to_json(const std::vector<PlanViolation>& v);

/// Checks the plan against a key-free netlist: targets are existing gate
/// outputs, helper/decoy signals exist and are outside the target's
/// transitive fanout, pairwise targets are mutually outside each other's
/// fanout, helper counts are within bounds, and the combined rewiring of all
/// instances stays acyclic.
std::vector<PlanViolation> validate_plan(const LockPlan& plan, const Netlist& netlist, const PlanBounds& bounds = {});

}  // namespace netlock
