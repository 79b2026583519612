// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "netlock/attack.hpp"
#include "netlock/bench_io.hpp"
#include "netlock/campaign.hpp"
#include "netlock/cnf.hpp"
#include "netlock/compiler.hpp"
#include "netlock/simulator.hpp"
#include "oracle.hpp"

using namespace netlock;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double secs(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::vector<std::string> kStyles = {"xor_xnor", "mux_lock", "perturb_restore", "pairwise_subgraph", "hybrid"};

CampaignConfig grid(const fs::path& out, std::vector<std::uint64_t> seeds, bool attack) {
  CampaignConfig c;
  for (const auto& n : oracle::iscas_names()) c.circuits.push_back(oracle::iscas(n).string());
  c.key_widths = {8, 16, 32};
  c.styles = kStyles;
  c.seeds = std::move(seeds);
  c.output_dir = out.string();
  c.attack_enabled = attack;
  return c;
}

void crit1() {
  auto t0 = Clock::now();
  bool ok = true;
  for (const auto& n : oracle::iscas_names()) {
    auto a = read_bench_file(oracle::iscas(n));
    auto b = parse_bench(write_bench(a), a.name());
    ok &= validate(a).empty() && a == b;
  }
  double t = secs(t0);
  verdict(1, ok && t < 1.0, "ISCAS-85 parse/validate/round trip", "8 circuits, " + fmt("%.3f s", t) + ", limit 1 s");
}

// Seed-1 cells of the multi-seed grid form the canonical 120-cell campaign.
void crit2to4(const std::vector<CampaignRow>& rows) {
  std::size_t cells = 0, cec_ok = 0, ber_pos = 0, recovered = 0;
  std::map<std::string, std::pair<double, std::size_t>> per_circuit;
  for (const auto& r : rows) {
    if (r.seed != 1) continue;
    ++cells;
    cec_ok += r.status == "ok" && r.correct_key_ok;
    ber_pos += r.status == "ok" && r.bit_error_rate > 0.0;
    recovered += r.attack_outcome == "key_recovered" && r.attack_verified && r.dip_count <= 10000 &&
                 r.times.attack_s <= 600.0;
    auto& pc = per_circuit[r.circuit];
    pc.first += r.bit_error_rate;
    ++pc.second;
  }
  const bool full = cells == 120;
  verdict(2, full && cec_ok == cells, "correct key SAT-equivalent to the original",
          std::to_string(cec_ok) + "/" + std::to_string(cells) + " cells");

  std::string detail;
  bool band = true;
  for (const auto& [c, v] : per_circuit) {
    const double mean = v.first / double(v.second);
    const bool in = mean >= 0.005 && mean <= 0.35;
    band &= in;
    detail += c + "=" + fmt("%.4f", mean) + (in ? "" : "!") + " ";
  }
  verdict(3, full && ber_pos == cells && band, "wrong-key corruption",
          std::to_string(ber_pos) + "/" + std::to_string(cells) + " cells BER>0; per-circuit means in [0.005,0.35]: " +
              detail);
  verdict(4, full && recovered == cells, "DIP attack recovers a verified key",
          std::to_string(recovered) + "/" + std::to_string(cells) + " within 10000 DIPs / 600 s");
}

void crit5(const std::vector<CampaignRow>& rows) {
  std::map<std::pair<std::string, std::string>, std::map<std::uint32_t, std::pair<double, std::size_t>>> g;
  std::set<std::uint64_t> seeds;
  for (const auto& r : rows) {
    auto& x = g[{r.circuit, r.style}][r.key_width];
    x.first += double(r.dip_count);
    ++x.second;
    seeds.insert(r.seed);
  }
  std::size_t up = 0;
  std::string bad;
  for (const auto& [k, w] : g) {
    auto mean = [&](std::uint32_t kw) { return w.at(kw).first / double(w.at(kw).second); };
    const double a = mean(8), b = mean(16), c = mean(32);
    if (a <= b && b <= c) {
      ++up;
    } else {
      bad += k.first + "/" + k.second + "(" + fmt("%.1f", a) + "," + fmt("%.1f", b) + "," + fmt("%.1f", c) + ") ";
    }
  }
  const double frac = g.empty() ? 0.0 : double(up) / double(g.size());
  verdict(5, seeds.size() >= 5 && frac >= 0.8, "mean DIPs non-decreasing 8->16->32",
          std::to_string(up) + "/" + std::to_string(g.size()) + " groups over " + std::to_string(seeds.size()) +
              " seeds, need 80%" + (bad.empty() ? "" : "; not monotone: " + bad));
}

void crit6() {
  std::mt19937_64 rng(2024);
  std::size_t agree = 0;
  const std::size_t total = 200;
  std::string first_bad;
  for (std::size_t t = 0; t < total; ++t) {
    const std::size_t ni = 3 + rng() % 10, ng = 8 + rng() % 23, no = 1 + rng() % 3;
    auto n = oracle::random_circuit(rng, ni, ng, no, "r" + std::to_string(t));
    auto p = oracle::random_plan(rng, n, 1 + rng() % 8);
    auto l = compile_plan(n, p);
    auto cls = enumerate_keys(l, n);
    CnfFormula cons;
    auto r = dip_attack(l, n, {}, &cons);
    bool ok = r.outcome == AttackOutcome::KeyRecovered && r.recovered_key &&
              std::find(cls.begin(), cls.end(), *r.recovered_key) != cls.end();
    auto cnt = count_remaining_keys(cons);
    ok = ok && cnt.exact && cnt.count == cls.size() && r.remaining_keys.count == cls.size();
    if (ok) {
      ++agree;
    } else if (first_bad.empty()) {
      first_bad = "; first mismatch at case " + std::to_string(t);
    }
  }
  verdict(6, agree == total, "DIP key in enumerated class, remaining count = class size",
          std::to_string(agree) + "/" + std::to_string(total) + " random circuits" + first_bad);
}

void crit7() {
  std::mt19937_64 rng(7);
  std::size_t agree = 0;
  const std::size_t cases = 1000;
  for (std::size_t t = 0; t < cases; ++t) {
    const std::size_t ni = 2 + rng() % 15;
    auto n = oracle::random_circuit(rng, ni, 5 + rng() % 60, 1 + rng() % 5);
    std::vector<bool> x(ni);
    for (std::size_t i = 0; i < ni; ++i) x[i] = rng() & 1;
    // Place the pattern in a random lane of a random block.
    auto block = random_patterns(ni, 64, rng);
    const std::size_t lane = rng() % 64;
    for (std::size_t i = 0; i < ni; ++i) block.set_bit(i, lane, x[i]);
    auto out = evaluate(n, block);
    auto ref = oracle::scalar_eval(n, x);
    bool same = true;
    for (std::size_t o = 0; o < ref.size(); ++o) same &= out.bit(o, lane) == ref[o];
    agree += same;
  }

  auto c17 = read_bench_file(oracle::iscas("c17"));
  auto f = encode_cnf(c17);
  auto sim = evaluate(c17, exhaustive_patterns(5));
  std::size_t tt = 0;
  for (std::uint64_t p = 0; p < 32; ++p) {
    auto s = sat::make_solver();
    auto v = load_cnf(*s, f);
    std::vector<sat::Lit> as;
    for (std::size_t i = 0; i < 5; ++i) as.push_back(sat::Lit::make(v[f.signal_vars[0][i]], !((p >> i) & 1)));
    if (s->solve(as) != sat::Result::Sat) continue;
    bool same = true;
    for (std::size_t o = 0; o < 2; ++o)
      same &= s->model_value(v[f.signal_vars[0][c17.output_ids()[o]]]) == sim.bit(o, p);
    tt += same;
  }
  verdict(7, agree == cases && tt == 32, "bit-parallel simulation vs scalar and CNF",
          std::to_string(agree) + "/" + std::to_string(cases) + " random cases, c17 " + std::to_string(tt) +
              "/32 patterns");
}

std::map<std::string, std::string> bench_files(const fs::path& dir) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".bench") m[e.path().filename().string()] = read_text_file(e.path());
  return m;
}

void crit8(const fs::path& work, std::size_t jobs) {
  auto cfg_a = grid(work / "det_a", {1}, false);
  auto cfg_b = cfg_a;
  cfg_b.output_dir = (work / "det_b").string();
  cfg_a.jobs = cfg_b.jobs = jobs;
  run_campaign(cfg_a);
  run_campaign(cfg_b);
  auto a = bench_files(cfg_a.output_dir), b = bench_files(cfg_b.output_dir);
  std::size_t same = 0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    same += it != b.end() && it->second == v;
  }
  verdict(8, a.size() == 120 && b.size() == a.size() && same == a.size(), "deterministic re-run",
          std::to_string(same) + "/" + std::to_string(a.size()) + " locked bench files byte-identical");
}

// Minimal CSV reader: quoted fields may contain commas and doubled quotes.
std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      rec.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      rec.push_back(std::move(field));
      field.clear();
      out.push_back(std::move(rec));
      rec.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (!field.empty() || !rec.empty()) {
    rec.push_back(field);
    out.push_back(rec);
  }
  return out;
}

void crit9(const fs::path& dir) {
  auto csv = read_csv(read_text_file(dir / "campaign.csv"));
  auto doc = nlohmann::json::parse(read_text_file(dir / "campaign.json"));
  bool ok = !csv.empty();
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; ok && i < csv[0].size(); ++i) col[csv[0][i]] = i;
  for (const auto* c : {"planner", "key_width", "status", "bit_error_rate", "pattern_error_rate", "dip_count",
                        "runtime_s", "attack_time_s"})
    ok &= col.count(c) == 1;

  struct Acc {
    std::size_t runs = 0, ok = 0;
    double ber = 0, per = 0, dips = 0, rt = 0, at = 0;
  };
  std::map<std::pair<std::string, std::uint32_t>, Acc> acc;
  if (ok) {
    for (std::size_t i = 1; i < csv.size(); ++i) {
      const auto& r = csv[i];
      auto& a = acc[{r[col["planner"]], static_cast<std::uint32_t>(std::stoul(r[col["key_width"]]))}];
      ++a.runs;
      if (r[col["status"]] != "ok") continue;
      ++a.ok;
      a.ber += std::strtod(r[col["bit_error_rate"]].c_str(), nullptr);
      a.per += std::strtod(r[col["pattern_error_rate"]].c_str(), nullptr);
      a.dips += std::strtod(r[col["dip_count"]].c_str(), nullptr);
      a.rt += std::strtod(r[col["runtime_s"]].c_str(), nullptr);
      a.at += std::strtod(r[col["attack_time_s"]].c_str(), nullptr);
    }
  }
  const auto& aggs = doc.at("aggregates");
  std::size_t matched = 0;
  ok &= aggs.size() == acc.size();
  for (const auto& j : aggs) {
    auto it = acc.find({j.at("planner").get<std::string>(), j.at("key_width").get<std::uint32_t>()});
    if (it == acc.end()) continue;
    const auto& a = it->second;
    const double n = double(a.ok);
    bool eq = j.at("runs").get<std::size_t>() == a.runs && j.at("ok_runs").get<std::size_t>() == a.ok &&
              j.at("mean_bit_error_rate").get<double>() == a.ber / n &&
              j.at("mean_pattern_error_rate").get<double>() == a.per / n &&
              j.at("mean_dip_count").get<double>() == a.dips / n && j.at("mean_runtime_s").get<double>() == a.rt / n &&
              j.at("mean_attack_time_s").get<double>() == a.at / n;
    matched += eq;
  }
  ok &= matched == aggs.size() && matched > 0;
  verdict(9, ok, "CSV-recomputed aggregates equal JSON aggregates",
          std::to_string(matched) + "/" + std::to_string(aggs.size()) +
              " aggregate rows exact; columns include corruption, DIPs, runtime");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netlock acceptance run"};
  fs::path work = fs::temp_directory_path() / "netlock_acceptance";
  std::size_t seeds = 5, jobs = 1;
  app.add_option("--workdir", work, "Scratch directory (recreated)");
  app.add_option("--seeds", seeds, "Seeds for the DIP trend grid")->check(CLI::Range(5, 100));
  app.add_option("-j,--jobs", jobs, "Campaign worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);
  auto t0 = Clock::now();
  try {
    crit1();
    std::vector<std::uint64_t> sv;
    for (std::size_t s = 1; s <= seeds; ++s) sv.push_back(s);
    auto cfg = grid(work / "grid", sv, true);
    cfg.jobs = jobs;
    auto rep = run_campaign(cfg, [](const std::string& line) { std::cerr << line << "\n"; });
    crit2to4(rep.rows);
    crit5(rep.rows);
    crit6();
    crit7();
    crit8(work, jobs);
    crit9(cfg.output_dir);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed, %.1f s\n", failures, secs(t0));
  return failures == 0 ? 0 : 1;
}
