// Lock planning: deterministic heuristic planner, feedback-driven refinement
// and candidate ranking.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netlock/analysis.hpp"
#include "netlock/attack.hpp"
#include "netlock/lock_plan.hpp"
#include "netlock/verification.hpp"

namespace netlock {

class PlannerError : public Error {
 public:
  using Error::Error;
};

/// Styles are applied round-robin; a single entry is a fixed style.
struct StylePolicy {
  std::vector<LockStyle> styles;

  static StylePolicy fixed(LockStyle s) { return {{s}}; }
  static StylePolicy hybrid() { return {{std::begin(kAllStyles), std::end(kAllStyles)}}; }
  bool is_hybrid() const { return styles.size() > 1; }
  /// Style name, or "hybrid".
  std::string name() const;
};

/// Accepts a style name or "hybrid".
StylePolicy parse_style_policy(std::string_view text);

struct PlannerOptions {
  std::size_t perturb_group_bits = 4;
  std::size_t perturb_helpers = 2;
  PlanBounds bounds;
};

/// Consumes sites in rank order. Decoys and helpers are gate outputs outside
/// the target's fanout, taken in rank order; a helper's polarity makes its
/// literal true on most of 256 sampled patterns. Correct key bits come from
/// the seeded generator. A trailing single bit under perturb_restore joins
/// the previous perturb group, or becomes an xor_xnor instance if none exists.
/// Throws PlannerError when the sites run out.
LockPlan heuristic_plan(const Netlist& netlist, const RankedSites& ranked, std::uint32_t key_width,
                        const StylePolicy& policy, std::uint64_t seed, const PlannerOptions& options = {});

enum class FeedbackReason { ParseFail, WrongKeyWeak, SatRecovered };
std::string_view to_string(FeedbackReason r);

inline constexpr double kWeakCorruptionThreshold = 0.01;

struct PlannerFeedback {
  FeedbackReason reason = FeedbackReason::WrongKeyWeak;
  CorruptionEstimate corruption;
  std::optional<AttackReport> attack;
  std::vector<PlanViolation> violations;  // parse_fail: offending instances
};

/// parse_fail: drop the offending instances (all, for plan-level problems)
/// and re-place them on unused sites. wrong_key_weak: remove one helper from
/// every perturb group that has more than one, then move the lowest-ranked
/// instance to the best unused site. sat_recovered: merge all xor_xnor
/// instances into one perturb_restore group. Throws PlannerError when no
/// legal refinement exists.
LockPlan refine_plan(const LockPlan& prev, const PlannerFeedback& feedback, const Netlist& netlist,
                     const RankedSites& ranked, std::uint64_t seed, const PlannerOptions& options = {});

struct CandidateRecord {
  LockPlan plan;
  std::optional<Netlist> locked;
  VerificationReport verification;
  std::optional<AttackReport> attack;
  std::string provenance;  // heuristic | llm | fallback | refined
  double score = 0.0;
};

double candidate_score(const VerificationReport& v);
/// FNV-1a over the serialized plan.
std::uint64_t plan_hash(const LockPlan& plan);
/// Scores every candidate and sorts by score (descending), then overhead,
/// then plan hash.
void rank_candidates(std::vector<CandidateRecord>& candidates);

}  // namespace netlock
