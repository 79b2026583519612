#include "netlock/campaign.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "netlock/analysis.hpp"
#include "netlock/bench_io.hpp"
#include "netlock/compiler.hpp"
#include "netlock/planner.hpp"
#include "netlock/verilog.hpp"

namespace netlock {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void reject_unknown(const json& j, const std::string& where, std::initializer_list<std::string_view> known) {
  if (!j.is_object()) throw Error(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw Error(where + ": unknown field '" + k + "'");
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(where + "." + key + ": wrong type");
  }
}

}  // namespace

CampaignConfig campaign_config_from_json(const json& j, const fs::path& base_dir) {
  reject_unknown(j, "config",
                 {"circuits", "key_widths", "styles", "candidates_per_pair", "seeds", "planner", "simulation", "attack",
                  "refinement_rounds", "refine_on_sat_recovery", "output_dir", "jobs", "emit_verilog"});
  CampaignConfig c;
  read_field(j, "circuits", c.circuits, "config");
  for (auto& p : c.circuits) {
    if (!base_dir.empty() && fs::path(p).is_relative()) p = (base_dir / p).lexically_normal().string();
  }
  read_field(j, "key_widths", c.key_widths, "config");
  read_field(j, "styles", c.styles, "config");
  read_field(j, "candidates_per_pair", c.candidates_per_pair, "config");
  read_field(j, "seeds", c.seeds, "config");
  read_field(j, "refinement_rounds", c.refinement_rounds, "config");
  read_field(j, "refine_on_sat_recovery", c.refine_on_sat_recovery, "config");
  read_field(j, "output_dir", c.output_dir, "config");
  read_field(j, "jobs", c.jobs, "config");
  read_field(j, "emit_verilog", c.emit_verilog, "config");
  if (j.contains("planner")) {
    const auto& p = j["planner"];
    reject_unknown(p, "config.planner",
                   {"kind", "endpoint", "auth_header", "auth_env", "timeout_s", "max_retries", "shortlist"});
    read_field(p, "kind", c.planner.kind, "config.planner");
    read_field(p, "endpoint", c.planner.llm.endpoint, "config.planner");
    read_field(p, "auth_header", c.planner.llm.auth_header, "config.planner");
    read_field(p, "auth_env", c.planner.auth_env, "config.planner");
    read_field(p, "timeout_s", c.planner.llm.timeout_s, "config.planner");
    read_field(p, "max_retries", c.planner.llm.max_retries, "config.planner");
    read_field(p, "shortlist", c.planner.llm.shortlist_size, "config.planner");
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    reject_unknown(s, "config.simulation",
                   {"check_patterns", "corruption_inputs", "corruption_keys", "seed", "sat_equivalence"});
    read_field(s, "check_patterns", c.verification.check_patterns, "config.simulation");
    read_field(s, "corruption_inputs", c.verification.corruption.inputs, "config.simulation");
    read_field(s, "corruption_keys", c.verification.corruption.keys, "config.simulation");
    read_field(s, "seed", c.verification.corruption.seed, "config.simulation");
    read_field(s, "sat_equivalence", c.verification.sat_equivalence, "config.simulation");
    c.verification.check_seed = c.verification.corruption.seed;
  }
  if (j.contains("attack")) {
    const auto& a = j["attack"];
    reject_unknown(a, "config.attack", {"enabled", "dip_budget", "time_budget_s", "count_cap"});
    read_field(a, "enabled", c.attack_enabled, "config.attack");
    read_field(a, "dip_budget", c.attack.dip_budget, "config.attack");
    read_field(a, "time_budget_s", c.attack.time_budget_s, "config.attack");
    read_field(a, "count_cap", c.count_cap, "config.attack");
  }
  check_campaign_config(c);
  return c;
}

CampaignConfig load_campaign_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return campaign_config_from_json(j, path.parent_path());
}

void check_campaign_config(const CampaignConfig& c) {
  if (c.circuits.empty()) throw Error("config: no circuits");
  if (c.key_widths.empty() || c.styles.empty() || c.seeds.empty()) throw Error("config: empty key_widths, styles or seeds");
  for (auto w : c.key_widths)
    if (w < 1) throw Error("config: key widths must be at least 1");
  for (const auto& s : c.styles) parse_style_policy(s);
  if (c.candidates_per_pair < 1 || c.jobs < 1) throw Error("config: candidates_per_pair and jobs must be at least 1");
  if (c.verification.check_patterns < 1 || c.verification.corruption.inputs < 1 || c.verification.corruption.keys < 1)
    throw Error("config: simulation sample sizes must be at least 1");
  if (c.attack.dip_budget < 1 || !(c.attack.time_budget_s > 0) || c.count_cap < 1)
    throw Error("config: attack budgets must be positive");
  if (c.planner.kind != "heuristic" && c.planner.kind != "llm")
    throw Error("config.planner.kind: expected heuristic or llm, got '" + c.planner.kind + "'");
  if (c.planner.kind == "llm" && c.planner.llm.endpoint.empty()) throw Error("config.planner.endpoint: required for llm");
}

json to_json(const CampaignConfig& c) {
  return {{"circuits", c.circuits},
          {"key_widths", c.key_widths},
          {"styles", c.styles},
          {"candidates_per_pair", c.candidates_per_pair},
          {"seeds", c.seeds},
          {"planner",
           {{"kind", c.planner.kind},
            {"endpoint", c.planner.llm.endpoint},
            {"auth_header", c.planner.llm.auth_header},
            {"auth_env", c.planner.auth_env},
            {"timeout_s", c.planner.llm.timeout_s},
            {"max_retries", c.planner.llm.max_retries},
            {"shortlist", c.planner.llm.shortlist_size}}},
          {"simulation",
           {{"check_patterns", c.verification.check_patterns},
            {"corruption_inputs", c.verification.corruption.inputs},
            {"corruption_keys", c.verification.corruption.keys},
            {"seed", c.verification.corruption.seed},
            {"sat_equivalence", c.verification.sat_equivalence}}},
          {"attack",
           {{"enabled", c.attack_enabled},
            {"dip_budget", c.attack.dip_budget},
            {"time_budget_s", c.attack.time_budget_s},
            {"count_cap", c.count_cap}}},
          {"refinement_rounds", c.refinement_rounds},
          {"refine_on_sat_recovery", c.refine_on_sat_recovery},
          {"output_dir", c.output_dir},
          {"jobs", c.jobs},
          {"emit_verilog", c.emit_verilog}};
}

std::string cell_id(const std::string& circuit, std::uint32_t key_width, const std::string& style,
                    std::optional<std::uint64_t> seed) {
  auto id = circuit + "_k" + std::to_string(key_width) + "_" + style;
  if (seed) id += "_s" + std::to_string(*seed);
  return id;
}

namespace {

struct CellContext {
  const CampaignConfig& cfg;
  const Netlist& original;
  const RankedSites& ranked;
  StageTimes& times;
  std::vector<PlanViolation> last_violations;
};

void evaluate_candidate(CellContext& ctx, CandidateRecord& c) {
  auto t0 = Clock::now();
  try {
    c.locked = compile_plan(ctx.original, c.plan);
    ctx.last_violations.clear();
  } catch (const CompileError& e) {
    ctx.last_violations = e.violations();
    c.verification = failed_verification(e.what());
    c.verification.overhead = {};
  } catch (const std::exception& e) {
    ctx.last_violations.clear();
    c.verification = failed_verification(e.what());
  }
  ctx.times.compile_s += since(t0);
  if (!c.locked) return;

  t0 = Clock::now();
  c.verification = verify_locked(ctx.original, *c.locked, ctx.cfg.verification);
  ctx.times.verify_s += since(t0);

  if (ctx.cfg.attack_enabled && c.verification.parse_ok) {
    t0 = Clock::now();
    c.attack = dip_attack(*c.locked, ctx.original, ctx.cfg.attack, nullptr, ctx.cfg.count_cap);
    ctx.times.attack_s += since(t0);
  }
}

std::optional<PlannerFeedback> feedback_for(const CampaignConfig& cfg, const CellContext& ctx, const CandidateRecord& c) {
  PlannerFeedback fb;
  fb.corruption = c.verification.corruption;
  fb.attack = c.attack;
  if (!c.verification.parse_ok) {
    fb.reason = FeedbackReason::ParseFail;
    fb.violations = ctx.last_violations;
    return fb;
  }
  if (c.verification.corruption.bit_error_rate < kWeakCorruptionThreshold) {
    fb.reason = FeedbackReason::WrongKeyWeak;
    return fb;
  }
  if (cfg.refine_on_sat_recovery && c.attack && c.attack->outcome == AttackOutcome::KeyRecovered) {
    fb.reason = FeedbackReason::SatRecovered;
    return fb;
  }
  return std::nullopt;
}

std::string llm_auth_value(const PlannerConfig& p) {
  if (p.auth_env.empty()) return {};
  const char* v = std::getenv(p.auth_env.c_str());
  return v ? v : "";
}

json candidate_summary(const CandidateRecord& c) {
  json j = {{"provenance", c.provenance},
            {"score", c.score},
            {"plan_hash", plan_hash(c.plan)},
            {"plan", to_json(c.plan)},
            {"verification", to_json(c.verification)}};
  if (c.attack) j["attack"] = to_json(*c.attack);
  return j;
}

}  // namespace

CampaignRow run_cell(const CampaignConfig& cfg, const std::string& circuit_path, std::uint32_t key_width,
                     const std::string& style, std::uint64_t seed) {
  const auto t_total = Clock::now();
  CampaignRow row;
  row.circuit = fs::path(circuit_path).stem().string();
  row.key_width = key_width;
  row.style = style;
  row.seed = seed;
  row.planner = cfg.planner.kind;
  row.cell = cell_id(row.circuit, key_width, style, cfg.seeds.size() > 1 ? std::optional(seed) : std::nullopt);
  std::vector<std::string> llm_errors;
  json candidates_json = json::array();
  try {
    const auto original = read_bench_file(circuit_path);
    row.circuit = original.name();
    const auto features = compute_features(original);
    const auto ranked = rank_nodes(original, features);
    const auto policy = parse_style_policy(style);
    CellContext ctx{cfg, original, ranked, row.times, {}};

    std::vector<CandidateRecord> cands;
    for (std::size_t j = 0; j < cfg.candidates_per_pair; ++j) {
      const std::uint64_t cseed = seed + j;
      CandidateRecord c;
      const auto t0 = Clock::now();
      if (cfg.planner.kind == "llm") {
        auto llm = cfg.planner.llm;
        llm.auth_value = llm_auth_value(cfg.planner);
        auto res = llm_plan(original, features, ranked, key_width, policy, cseed, llm);
        c.plan = std::move(res.plan);
        c.provenance = res.provenance;
        row.llm_attempts += res.attempts;
        row.llm_fallback = row.llm_fallback || res.provenance == "fallback";
        llm_errors.insert(llm_errors.end(), res.errors.begin(), res.errors.end());
      } else {
        c.plan = heuristic_plan(original, ranked, key_width, policy, cseed);
        c.provenance = "heuristic";
      }
      row.times.plan_s += since(t0);
      evaluate_candidate(ctx, c);
      const auto base = c.provenance;
      cands.push_back(std::move(c));

      for (std::size_t r = 0; r < cfg.refinement_rounds; ++r) {
        const auto fb = feedback_for(cfg, ctx, cands.back());
        if (!fb) break;
        CandidateRecord refined;
        const auto tr = Clock::now();
        try {
          refined.plan = refine_plan(cands.back().plan, *fb, original, ranked, cseed);
        } catch (const PlannerError&) {
          row.times.plan_s += since(tr);
          break;
        }
        row.times.plan_s += since(tr);
        refined.provenance = base + "+refined";
        evaluate_candidate(ctx, refined);
        cands.push_back(std::move(refined));
        ++row.refinements;
      }
    }
    rank_candidates(cands);
    for (const auto& c : cands) candidates_json.push_back(candidate_summary(c));
    const auto& win = cands.front();
    row.candidates = cands.size();
    row.provenance = win.provenance;
    row.score = win.score;
    row.parse_ok = win.verification.parse_ok;
    row.correct_key_ok = win.verification.correct_key_ok;
    row.bit_error_rate = win.verification.corruption.bit_error_rate;
    row.pattern_error_rate = win.verification.corruption.pattern_error_rate;
    row.gate_overhead_ratio = win.verification.overhead.gate_overhead_ratio;
    row.key_gate_count = win.verification.overhead.key_gate_count;
    row.key_input_count = win.verification.overhead.key_input_count;
    if (win.attack) {
      row.attack_outcome = std::string(to_string(win.attack->outcome));
      row.attack_verified = win.attack->verified;
      row.dip_count = win.attack->dip_count;
      row.remaining_keys = win.attack->remaining_keys.count;
      row.remaining_keys_exact = win.attack->remaining_keys.exact;
      row.solver_time_s = win.attack->solver_time_s;
    }
    if (!win.locked) throw Error("no candidate compiled: " + win.verification.parse_error);

    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    const auto stem = row.circuit + "_k" + std::to_string(key_width) + "_" + style +
                      (cfg.seeds.size() > 1 ? "_s" + std::to_string(seed) : "");
    row.bench_path = (out / (stem + ".bench")).string();
    write_text_file(row.bench_path, write_bench(*win.locked));
    if (cfg.emit_verilog) {
      row.verilog_path = (out / (stem + ".v")).string();
      write_text_file(row.verilog_path, emit_verilog(*win.locked));
    }
    row.status = row.parse_ok ? "ok" : "failed";
    if (!row.parse_ok) row.error = win.verification.parse_error;
  } catch (const std::exception& e) {
    row.status = "failed";
    row.error = e.what();
  }
  row.times.total_s = since(t_total);

  try {
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    row.json_path = (out / ("run_" + row.cell + ".json")).string();
    json run = {{"cell", row.cell}, {"row", to_json(row)}, {"candidates", std::move(candidates_json)}};
    if (!llm_errors.empty()) run["llm_errors"] = llm_errors;
    write_text_file(row.json_path, run.dump(2) + "\n");
  } catch (const std::exception& e) {
    row.status = "failed";
    row.error += std::string(row.error.empty() ? "" : "; ") + e.what();
    row.json_path.clear();
  }
  return row;
}

std::vector<AggregateRow> aggregate(const std::vector<CampaignRow>& rows) {
  if (rows.empty()) throw Error("aggregate: no rows");
  std::map<std::pair<std::string, std::uint32_t>, AggregateRow> groups;
  for (const auto& r : rows) {
    auto& a = groups[{r.planner, r.key_width}];
    a.planner = r.planner;
    a.key_width = r.key_width;
    ++a.runs;
    a.llm_attempts += r.llm_attempts;
    if (r.llm_fallback) ++a.llm_fallbacks;
    if (r.status != "ok") continue;
    ++a.ok_runs;
    a.mean_bit_error_rate += r.bit_error_rate;
    a.mean_pattern_error_rate += r.pattern_error_rate;
    a.mean_dip_count += static_cast<double>(r.dip_count);
    a.mean_runtime_s += r.times.total_s;
    a.mean_attack_time_s += r.times.attack_s;
  }
  std::vector<AggregateRow> out;
  for (auto& [key, a] : groups) {
    if (a.ok_runs > 0) {
      const auto n = static_cast<double>(a.ok_runs);
      a.mean_bit_error_rate /= n;
      a.mean_pattern_error_rate /= n;
      a.mean_dip_count /= n;
      a.mean_runtime_s /= n;
      a.mean_attack_time_s /= n;
    }
    out.push_back(a);
  }
  return out;
}

CampaignReport run_campaign(const CampaignConfig& cfg, const CampaignLog& log) {
  check_campaign_config(cfg);
  struct Cell {
    std::string id, path, style;
    std::uint32_t width;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  const bool multi_seed = cfg.seeds.size() > 1;
  for (const auto& path : cfg.circuits)
    for (auto w : cfg.key_widths)
      for (const auto& s : cfg.styles)
        for (auto seed : cfg.seeds) {
          const auto stem = fs::path(path).stem().string();
          cells.push_back({cell_id(stem, w, s, multi_seed ? std::optional(seed) : std::nullopt), path, s, w, seed});
        }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.id < b.id; });
  std::set<std::string> ids;
  for (const auto& c : cells)
    if (!ids.insert(c.id).second) throw Error("config: duplicate cell '" + c.id + "' (repeated circuit, width or style?)");

  CampaignReport rep;
  rep.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      const auto& c = cells[i];
      rep.rows[i] = run_cell(cfg, c.path, c.width, c.style, c.seed);
      if (log) {
        const auto& r = rep.rows[i];
        std::ostringstream os;
        os << "[" << (i + 1) << "/" << cells.size() << "] " << r.cell << " " << r.status;
        if (r.status == "ok") {
          os << " ber=" << r.bit_error_rate << " dips=" << r.dip_count << " attack=" << r.attack_outcome;
        } else {
          os << " error=" << r.error;
        }
        std::lock_guard lock(log_mu);
        log(os.str());
      }
    }
  };
  const auto jobs = std::min(cfg.jobs, std::max<std::size_t>(1, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  rep.aggregates = aggregate(rep.rows);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  json doc = to_json(rep);
  doc["config"] = to_json(cfg);
  write_text_file(out / "campaign.json", doc.dump(2) + "\n");
  write_text_file(out / "campaign.csv", rows_to_csv(rep.rows));
  return rep;
}

json to_json(const CampaignRow& r) {
  return {{"cell", r.cell},
          {"circuit", r.circuit},
          {"key_width", r.key_width},
          {"style", r.style},
          {"seed", r.seed},
          {"planner", r.planner},
          {"provenance", r.provenance},
          {"status", r.status},
          {"error", r.error},
          {"parse_ok", r.parse_ok},
          {"correct_key_ok", r.correct_key_ok},
          {"bit_error_rate", r.bit_error_rate},
          {"pattern_error_rate", r.pattern_error_rate},
          {"gate_overhead_ratio", r.gate_overhead_ratio},
          {"key_gate_count", r.key_gate_count},
          {"key_input_count", r.key_input_count},
          {"attack_outcome", r.attack_outcome},
          {"attack_verified", r.attack_verified},
          {"dip_count", r.dip_count},
          {"remaining_keys", r.remaining_keys},
          {"remaining_keys_exact", r.remaining_keys_exact},
          {"solver_time_s", r.solver_time_s},
          {"plan_time_s", r.times.plan_s},
          {"compile_time_s", r.times.compile_s},
          {"verify_time_s", r.times.verify_s},
          {"attack_time_s", r.times.attack_s},
          {"runtime_s", r.times.total_s},
          {"candidates", r.candidates},
          {"refinements", r.refinements},
          {"llm_attempts", r.llm_attempts},
          {"llm_fallback", r.llm_fallback},
          {"score", r.score},
          {"bench_path", r.bench_path},
          {"verilog_path", r.verilog_path},
          {"json_path", r.json_path}};
}

json to_json(const AggregateRow& a) {
  return {{"planner", a.planner},
          {"key_width", a.key_width},
          {"runs", a.runs},
          {"ok_runs", a.ok_runs},
          {"mean_bit_error_rate", a.mean_bit_error_rate},
          {"mean_pattern_error_rate", a.mean_pattern_error_rate},
          {"mean_dip_count", a.mean_dip_count},
          {"mean_runtime_s", a.mean_runtime_s},
          {"mean_attack_time_s", a.mean_attack_time_s},
          {"llm_attempts", a.llm_attempts},
          {"llm_fallbacks", a.llm_fallbacks}};
}

json to_json(const CampaignReport& r) {
  json rows = json::array();
  for (const auto& x : r.rows) rows.push_back(to_json(x));
  json aggs = json::array();
  for (const auto& a : r.aggregates) aggs.push_back(to_json(a));
  return {{"rows", std::move(rows)}, {"aggregates", std::move(aggs)}};
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) return fmt_double(v.get<double>());
  return v.dump();
}

std::string to_csv(const std::vector<std::string>& cols, const std::vector<json>& rows) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      out += csv_field(r.at(cols[i]));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "cell",           "circuit",         "key_width",       "style",           "seed",
      "planner",        "provenance",      "status",          "parse_ok",        "correct_key_ok",
      "bit_error_rate", "pattern_error_rate", "gate_overhead_ratio", "key_gate_count", "key_input_count",
      "attack_outcome", "attack_verified", "dip_count",       "remaining_keys",  "remaining_keys_exact",
      "solver_time_s",  "plan_time_s",     "compile_time_s",  "verify_time_s",   "attack_time_s",
      "runtime_s",      "candidates",      "refinements",     "llm_attempts",    "llm_fallback",
      "score",          "bench_path",      "verilog_path",    "json_path",       "error"};
  return cols;
}

std::string rows_to_csv(const std::vector<CampaignRow>& rows) {
  std::vector<json> js;
  for (const auto& r : rows) js.push_back(to_json(r));
  return to_csv(csv_columns(), js);
}

std::string aggregates_to_csv(const std::vector<AggregateRow>& aggs) {
  static const std::vector<std::string> cols = {
      "planner",        "key_width",      "runs",          "ok_runs",      "mean_bit_error_rate", "mean_pattern_error_rate",
      "mean_dip_count", "mean_runtime_s", "mean_attack_time_s", "llm_attempts", "llm_fallbacks"};
  std::vector<json> js;
  for (const auto& a : aggs) js.push_back(to_json(a));
  return to_csv(cols, js);
}

std::string format_summary(const std::vector<AggregateRow>& aggs) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %5s %6s %11s %8s %11s\n", "planner", "key", "runs", "corruption", "DIPs",
                "runtime_s");
  out += line;
  for (const auto& a : aggs) {
    std::snprintf(line, sizeof line, "%-12s %5u %3zu/%-2zu %11.3f %8.1f %11.2f\n", a.planner.c_str(), a.key_width,
                  a.ok_runs, a.runs, a.mean_bit_error_rate, a.mean_dip_count, a.mean_runtime_s);
    out += line;
  }
  return out;
}

}  // namespace netlock
