// Batch lock/verify/attack campaigns with JSON and CSV reporting.
//
// Config file (JSON; unknown keys are rejected, relative circuit paths are
// resolved against the config file's directory):
//   { "circuits": ["c432.bench", ...],
//     "key_widths": [8, 16, 32],
//     "styles": ["xor_xnor", "hybrid"],
//     "candidates_per_pair": 1,
//     "seeds": [1],
//     "planner": {"kind": "heuristic"}
//              | {"kind": "llm", "endpoint": "http://host:port/path",
//                 "auth_header": "Authorization", "auth_env": "NETLOCK_LLM_TOKEN",
//                 "timeout_s": 60, "max_retries": 3, "shortlist": 32},
//     "simulation": {"check_patterns": 4096, "corruption_inputs": 256,
//                    "corruption_keys": 16, "seed": 1},
//     "attack": {"enabled": true, "dip_budget": 10000, "time_budget_s": 600,
//                "count_cap": 65536},
//     "refinement_rounds": 1, "refine_on_sat_recovery": false,
//     "output_dir": "netlock_out", "jobs": 1, "emit_verilog": true }

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netlock/attack.hpp"
#include "netlock/llm_planner.hpp"
#include "netlock/verification.hpp"

namespace netlock {

struct PlannerConfig {
  std::string kind = "heuristic";  // heuristic | llm
  LlmConfig llm;
  std::string auth_env = "NETLOCK_LLM_TOKEN";
};

struct CampaignConfig {
  std::vector<std::string> circuits;
  std::vector<std::uint32_t> key_widths = {8, 16, 32};
  std::vector<std::string> styles = {"hybrid"};
  std::size_t candidates_per_pair = 1;
  std::vector<std::uint64_t> seeds = {1};
  PlannerConfig planner;
  VerificationOptions verification;
  bool attack_enabled = true;
  AttackBudget attack;
  std::uint64_t count_cap = kDefaultKeyCountCap;
  std::size_t refinement_rounds = 1;
  bool refine_on_sat_recovery = false;
  std::string output_dir = "netlock_out";
  std::size_t jobs = 1;
  bool emit_verilog = true;
};

/// Throws Error naming the offending field.
CampaignConfig campaign_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
CampaignConfig load_campaign_config(const std::filesystem::path& path);
nlohmann::json to_json(const CampaignConfig& c);
/// Checks count and width invariants; throws Error.
void check_campaign_config(const CampaignConfig& c);

struct StageTimes {
  double plan_s = 0, compile_s = 0, verify_s = 0, attack_s = 0, total_s = 0;
};

struct CampaignRow {
  std::string cell;
  std::string circuit;
  std::uint32_t key_width = 0;
  std::string style;
  std::uint64_t seed = 0;
  std::string planner;     // configured planner
  std::string provenance;  // heuristic | llm | fallback, "+refined" when a refinement won
  std::string status = "failed";  // ok | failed
  std::string error;
  bool parse_ok = false;
  bool correct_key_ok = false;
  double bit_error_rate = 0;
  double pattern_error_rate = 0;
  double gate_overhead_ratio = 0;
  std::size_t key_gate_count = 0;
  std::size_t key_input_count = 0;
  std::string attack_outcome;  // empty when the attack was skipped
  bool attack_verified = false;
  std::size_t dip_count = 0;
  std::uint64_t remaining_keys = 0;
  bool remaining_keys_exact = true;
  double solver_time_s = 0;
  StageTimes times;
  std::size_t candidates = 0;
  std::size_t refinements = 0;
  std::size_t llm_attempts = 0;
  bool llm_fallback = false;
  double score = 0;
  std::string bench_path, verilog_path, json_path;
};

struct AggregateRow {
  std::string planner;
  std::uint32_t key_width = 0;
  std::size_t runs = 0;
  std::size_t ok_runs = 0;
  double mean_bit_error_rate = 0;
  double mean_pattern_error_rate = 0;
  double mean_dip_count = 0;
  double mean_runtime_s = 0;
  double mean_attack_time_s = 0;
  std::size_t llm_attempts = 0;
  std::size_t llm_fallbacks = 0;
};

struct CampaignReport {
  std::vector<CampaignRow> rows;
  std::vector<AggregateRow> aggregates;
};

/// Means over rows with status ok, grouped by (planner, key width) in
/// ascending order, summed in row order. Throws Error on empty input.
std::vector<AggregateRow> aggregate(const std::vector<CampaignRow>& rows);

using CampaignLog = std::function<void(const std::string&)>;

/// Runs every (circuit, width, style, seed) cell, writes per-cell artifacts
/// plus campaign.json and campaign.csv into the output directory. Rows are
/// ordered by cell id.
CampaignReport run_campaign(const CampaignConfig& config, const CampaignLog& log = {});

/// One cell; failures are captured in the returned row.
CampaignRow run_cell(const CampaignConfig& config, const std::string& circuit_path, std::uint32_t key_width,
                     const std::string& style, std::uint64_t seed);

nlohmann::json to_json(const CampaignRow& r);
nlohmann::json to_json(const AggregateRow& a);
nlohmann::json to_json(const CampaignReport& r);

/// CSV with a header line; doubles are printed with round-trip precision.
std::string rows_to_csv(const std::vector<CampaignRow>& rows);
std::string aggregates_to_csv(const std::vector<AggregateRow>& aggs);
const std::vector<std::string>& csv_columns();

/// Table in the shape planner | key width | corruption | DIPs | runtime.
std::string format_summary(const std::vector<AggregateRow>& aggs);

std::string cell_id(const std::string& circuit, std::uint32_t key_width, const std::string& style,
                    std::optional<std::uint64_t> seed);

}  // namespace netlock
