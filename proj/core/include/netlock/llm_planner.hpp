// Lock planning through an HTTP endpoint that answers with a lockplan_v1
// document, with validation-driven re-prompting and heuristic fallback.
//
// Request body (POST, application/json):
//   { "task": "lockplan_v1",
//     "circuit": {"name", "n_inputs", "n_outputs", "n_gates", "depth"},
//     "shortlist": [{"node", "score", "features": {...}}],
//     "key_width": 16, "allowed_styles": ["xor_xnor", ...],
//     "constraints_doc": "...",
//     "attempt": 2, "previous_response": "...", "violations": [...] }
// The last three fields appear on re-prompts only.

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netlock/analysis.hpp"
#include "netlock/planner.hpp"

namespace netlock {

struct LlmConfig {
  std::string endpoint;  // http://host[:port]/path
  std::string auth_header;
  std::string auth_value;
  double timeout_s = 60.0;
  std::size_t max_retries = 3;  // total requests before falling back
  std::size_t shortlist_size = 32;
};

struct LlmPlanResult {
  LockPlan plan;
  std::string provenance;  // llm | fallback
  std::size_t attempts = 0;
  std::vector<std::string> errors;  // one entry per rejected attempt
};

/// Schema and rule summary sent with every request.
std::string lockplan_constraints_doc();

nlohmann::json llm_request_body(const Netlist& netlist, const FeatureMap& features, const RankedSites& ranked,
                                std::uint32_t key_width, const StylePolicy& policy, std::size_t shortlist_size);

/// Throws Error for an unusable endpoint configuration. Transport failures
/// and rejected responses consume attempts; when they run out the result is
/// heuristic_plan(...) with provenance "fallback".
LlmPlanResult llm_plan(const Netlist& netlist, const FeatureMap& features, const RankedSites& ranked,
                       std::uint32_t key_width, const StylePolicy& policy, std::uint64_t seed, const LlmConfig& config,
                       const PlannerOptions& options = {});

}  // namespace netlock
