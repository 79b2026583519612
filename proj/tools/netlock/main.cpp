#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "netlock/analysis.hpp"
#include "netlock/attack.hpp"
#include "netlock/bench_io.hpp"
#include "netlock/campaign.hpp"
#include "netlock/cnf.hpp"
#include "netlock/compiler.hpp"
#include "netlock/planner.hpp"
#include "netlock/verification.hpp"
#include "netlock/verilog.hpp"

namespace fs = std::filesystem;
using namespace netlock;
using json = nlohmann::json;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  bool json = false;
};

void print(const Common& c, const json& j, const std::string& text) {
  if (c.json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

int cmd_analyze(const Common& c, const std::string& path, std::size_t top) {
  const auto n = read_bench_file(path);
  const auto features = compute_features(n);
  const auto ranked = rank_nodes(n, features);
  auto report = analysis_report(n, features, ranked);
  if (!c.out.empty()) write_text_file(c.out, report.dump(2) + "\n");
  const auto& s = ranked.circuit_stats;
  std::string text = n.name() + ": " + std::to_string(s.inputs) + " inputs, " + std::to_string(s.outputs) +
                     " outputs, " + std::to_string(s.gates) + " gates, depth " + std::to_string(s.max_depth) + "\n";
  char line[160];
  for (std::size_t i = 0; i < ranked.entries.size() && i < top; ++i) {
    const auto& e = ranked.entries[i];
    const auto& f = features.at(e.node);
    std::snprintf(line, sizeof line, "%4zu  %-12s score=%.4f depth=%d fanout=%zu tfo=%zu cone=%.3f obs=%.3f\n", i + 1,
                  e.node.c_str(), e.score, f.depth, f.fanout, f.tfo_size, f.cone_coverage, f.observability);
    text += line;
  }
  print(c, report, text);
  return 0;
}

int cmd_lock(const Common& c, const std::string& path, std::uint32_t width, const std::string& style,
             const std::string& plan_path, bool with_verilog) {
  const auto n = read_bench_file(path);
  LockPlan plan;
  if (!plan_path.empty()) {
    plan = parse_plan(read_text_file(plan_path));
  } else {
    const auto ranked = rank_nodes(n, compute_features(n));
    plan = heuristic_plan(n, ranked, width, parse_style_policy(style), c.seed);
  }
  const auto locked = compile_plan(n, plan);
  const auto ov = overhead(n, locked);
  // --out is either a .bench path (siblings share its stem) or a directory.
  fs::path out = c.out.empty() ? fs::path(".") : fs::path(c.out);
  auto stem = n.name() + "_k" + std::to_string(plan.key_width) + "_" + (plan_path.empty() ? style : "plan");
  if (out.extension() == ".bench") {
    stem = out.stem().string();
    out = out.parent_path().empty() ? fs::path(".") : out.parent_path();
  }
  fs::create_directories(out);
  const auto bench = out / (stem + ".bench");
  write_text_file(bench, write_bench(locked));
  write_text_file(out / (stem + ".plan.json"), serialize_plan(plan) + "\n");
  json j = {{"bench", bench.string()}, {"plan", to_json(plan)}, {"overhead", to_json(ov)},
            {"correct_key", locked.correct_key()->to_string()}};
  if (with_verilog) {
    const auto v = out / (stem + ".v");
    write_text_file(v, emit_verilog(locked));
    j["verilog"] = v.string();
  }
  print(c, j,
        "wrote " + bench.string() + " (" + std::to_string(ov.key_gate_count) + " key gates, " +
            std::to_string(ov.key_input_count) + " key inputs, key " + locked.correct_key()->to_string() + ")\n");
  return 0;
}

int cmd_verify(const Common& c, const std::string& orig_path, const std::string& locked_path, const std::string& key,
               std::size_t inputs, std::size_t keys) {
  const auto orig = read_bench_file(orig_path);
  auto locked = read_bench_file(locked_path);
  if (!key.empty()) locked = locked.with_correct_key(KeyVector::from_string(key));
  if (!locked.correct_key()) throw Error(locked_path + ": no correct key (add a '# key=' header or pass --key)");
  VerificationOptions opt;
  opt.corruption.inputs = inputs;
  opt.corruption.keys = keys;
  opt.corruption.seed = c.seed;
  opt.check_seed = c.seed;
  const auto r = verify_locked(orig, locked, opt);
  auto j = to_json(r);
  if (!c.out.empty()) write_text_file(c.out, j.dump(2) + "\n");
  char text[256];
  std::snprintf(text, sizeof text, "parse_ok=%d correct_key_ok=%d bit_error_rate=%.4f pattern_error_rate=%.4f overhead=%.4f\n",
                r.parse_ok, r.correct_key_ok, r.corruption.bit_error_rate, r.corruption.pattern_error_rate,
                r.overhead.gate_overhead_ratio);
  print(c, j, text);
  return r.correct_key_ok ? 0 : 1;
}

int cmd_attack(const Common& c, const std::string& locked_path, const std::string& oracle_path, std::size_t dips,
               double seconds, const std::string& dimacs) {
  const auto locked = read_bench_file(locked_path);
  const auto oracle = read_bench_file(oracle_path);
  if (!dimacs.empty()) write_text_file(dimacs, to_dimacs(encode_cnf(locked, 2, true)));
  CnfFormula constraints;
  const auto r = dip_attack(locked, oracle, {dips, seconds}, &constraints);
  auto j = to_json(r);
  if (!c.out.empty()) write_text_file(c.out, j.dump(2) + "\n");
  std::string text = std::string(to_string(r.outcome)) + ": " + std::to_string(r.dip_count) + " DIPs, " +
                     std::to_string(r.solver_time_s) + " s solver time";
  if (r.recovered_key) text += ", key " + r.recovered_key->to_string();
  text += ", remaining keys " + std::string(r.remaining_keys.exact ? "" : ">=") + std::to_string(r.remaining_keys.count) + "\n";
  print(c, j, text);
  return r.outcome == AttackOutcome::KeyRecovered ? 0 : 2;
}

int cmd_campaign(const Common& c, bool seed_given, const std::string& config_path, std::size_t jobs,
                 const std::vector<std::uint32_t>& widths, const std::vector<std::string>& styles, bool no_attack) {
  auto cfg = load_campaign_config(config_path);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (seed_given) cfg.seeds = {c.seed};
  if (jobs > 0) cfg.jobs = jobs;
  if (!widths.empty()) cfg.key_widths = widths;
  if (!styles.empty()) cfg.styles = styles;
  if (no_attack) cfg.attack_enabled = false;
  check_campaign_config(cfg);
  const auto rep = run_campaign(cfg, [&](const std::string& line) {
    if (!c.json) std::cerr << line << "\n";
  });
  std::size_t failed = 0;
  for (const auto& r : rep.rows) failed += r.status != "ok";
  json j = {{"rows", rep.rows.size()}, {"failed", failed}, {"output_dir", cfg.output_dir}};
  json aggs = json::array();
  for (const auto& a : rep.aggregates) aggs.push_back(to_json(a));
  j["aggregates"] = aggs;
  print(c, j, format_summary(rep.aggregates) + std::to_string(rep.rows.size()) + " rows, " + std::to_string(failed) +
                  " failed; reports in " + cfg.output_dir + "\n");
  return failed == 0 ? 0 : 3;
}

int cmd_report(const Common& c, const std::string& path, bool csv) {
  const auto doc = json::parse(read_text_file(path));
  std::vector<AggregateRow> aggs;
  for (const auto& a : doc.at("aggregates")) {
    AggregateRow r;
    r.planner = a.at("planner");
    r.key_width = a.at("key_width");
    r.runs = a.at("runs");
    r.ok_runs = a.at("ok_runs");
    r.mean_bit_error_rate = a.at("mean_bit_error_rate");
    r.mean_pattern_error_rate = a.at("mean_pattern_error_rate");
    r.mean_dip_count = a.at("mean_dip_count");
    r.mean_runtime_s = a.at("mean_runtime_s");
    r.mean_attack_time_s = a.at("mean_attack_time_s");
    r.llm_attempts = a.at("llm_attempts");
    r.llm_fallbacks = a.at("llm_fallbacks");
    aggs.push_back(r);
  }
  const auto text = csv ? aggregates_to_csv(aggs) : format_summary(aggs);
  if (!c.out.empty()) write_text_file(c.out, text);
  print(c, doc.at("aggregates"), text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netlock: logic locking, verification and SAT attack toolkit"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "RNG seed")->capture_default_str();
    sub->add_option("--out", common.out, "Output file (lock: .bench file or directory)");
    sub->add_flag("--json", common.json, "Print machine-readable JSON");
  };

  std::string path, path2, style = "xor_xnor", plan_path, key, dimacs;
  std::size_t top = 20, inputs = 256, keys = 16, dips = 10000, jobs = 0;
  std::uint32_t width = 8;
  double seconds = 600;
  bool verilog = true, csv = false, no_attack = false;
  std::vector<std::uint32_t> widths;
  std::vector<std::string> styles;

  auto* analyze = app.add_subcommand("analyze", "Structural features and ranked lock sites");
  analyze->add_option("bench", path, "Input .bench file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--top", top, "Sites to list")->capture_default_str();
  add_common(analyze);

  auto* lock = app.add_subcommand("lock", "Plan (or load a plan) and compile a locked netlist");
  lock->add_option("bench", path, "Input .bench file")->required()->check(CLI::ExistingFile);
  lock->add_option("-k,--key-width", width, "Key width")->capture_default_str();
  lock->add_option("-s,--style", style, "Lock style or hybrid")->capture_default_str();
  lock->add_option("--plan", plan_path, "Use this lockplan_v1 file instead of planning")->check(CLI::ExistingFile);
  lock->add_flag("!--no-verilog", verilog, "Skip the Verilog output");
  add_common(lock);

  auto* verify = app.add_subcommand("verify", "Check correct-key behaviour and wrong-key corruption");
  verify->add_option("original", path, "Original .bench")->required()->check(CLI::ExistingFile);
  verify->add_option("locked", path2, "Locked .bench")->required()->check(CLI::ExistingFile);
  verify->add_option("--key", key, "Correct key bits (overrides the file header)");
  verify->add_option("--inputs", inputs, "Input patterns for corruption")->capture_default_str();
  verify->add_option("--keys", keys, "Wrong keys for corruption")->capture_default_str();
  add_common(verify);

  auto* attack = app.add_subcommand("attack", "Run the DIP SAT attack against an oracle");
  attack->add_option("locked", path, "Locked .bench")->required()->check(CLI::ExistingFile);
  attack->add_option("oracle", path2, "Original (oracle) .bench")->required()->check(CLI::ExistingFile);
  attack->add_option("--dip-budget", dips, "Maximum DIPs")->capture_default_str();
  attack->add_option("--time-budget", seconds, "Wall-clock limit in seconds")->capture_default_str();
  attack->add_option("--dimacs", dimacs, "Also dump the two-copy CNF of the locked netlist");
  add_common(attack);

  auto* campaign = app.add_subcommand("campaign", "Run a campaign from a JSON config");
  campaign->add_option("config", path, "Campaign config")->required()->check(CLI::ExistingFile);
  campaign->add_option("-j,--jobs", jobs, "Worker threads");
  campaign->add_option("--widths", widths, "Override key widths");
  campaign->add_option("--styles", styles, "Override styles");
  campaign->add_flag("--no-attack", no_attack, "Skip the SAT attack");
  add_common(campaign);

  auto* report = app.add_subcommand("report", "Summarize campaign.json aggregates");
  report->add_option("campaign_json", path, "campaign.json")->required()->check(CLI::ExistingFile);
  report->add_flag("--csv", csv, "Print aggregates as CSV");
  add_common(report);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*analyze) return cmd_analyze(common, path, top);
    if (*lock) return cmd_lock(common, path, width, style, plan_path, verilog);
    if (*verify) return cmd_verify(common, path, path2, key, inputs, keys);
    if (*attack) return cmd_attack(common, path, path2, dips, seconds, dimacs);
    if (*campaign) return cmd_campaign(common, campaign->count("--seed") > 0, path, jobs, widths, styles, no_attack);
    if (*report) return cmd_report(common, path, csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
