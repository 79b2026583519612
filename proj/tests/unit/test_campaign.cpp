#include <sstream>

#include "doctest.h"
#include "netlock/bench_io.hpp"
#include "netlock/campaign.hpp"
#include "oracle.hpp"

using namespace netlock;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / "netlock_unit" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

CampaignRow row(const std::string& planner, std::uint32_t w, double ber, std::size_t dips, bool ok = true) {
  CampaignRow r;
  r.planner = planner;
  r.key_width = w;
  r.bit_error_rate = ber;
  r.pattern_error_rate = ber;
  r.dip_count = dips;
  r.status = ok ? "ok" : "failed";
  r.times.total_s = 1.0;
  return r;
}

}  // namespace

TEST_CASE("campaign: c17 width 2 xor seed 7") {
  CampaignConfig cfg;
  cfg.circuits = {oracle::iscas("c17").string()};
  cfg.key_widths = {2};
  cfg.styles = {"xor_xnor"};
  cfg.seeds = {7};
  cfg.output_dir = scratch("c17").string();
  auto rep = run_campaign(cfg);
  REQUIRE(rep.rows.size() == 1);
  const auto& r = rep.rows[0];
  CHECK(r.status == "ok");
  CHECK(r.correct_key_ok);
  CHECK(r.parse_ok);
  CHECK(r.cell == "c17_k2_xor_xnor");
  CHECK(r.attack_outcome == "key_recovered");
  CHECK(r.attack_verified);
  CHECK(fs::exists(r.bench_path));
  CHECK(fs::exists(r.verilog_path));
  CHECK(fs::exists(r.json_path));
  auto locked = read_bench_file(r.bench_path);
  CHECK(locked.key_inputs().size() == 2);
  CHECK(fs::exists(fs::path(cfg.output_dir) / "campaign.json"));
  CHECK(fs::exists(fs::path(cfg.output_dir) / "campaign.csv"));
  REQUIRE(rep.aggregates.size() == 1);
  CHECK(rep.aggregates[0].mean_bit_error_rate == r.bit_error_rate);
}

TEST_CASE("campaign: failures are isolated") {
  CampaignConfig cfg;
  cfg.circuits = {oracle::iscas("c17").string(), (oracle::data_dir() / "missing.bench").string()};
  cfg.key_widths = {2, 12};
  cfg.styles = {"xor_xnor"};
  cfg.output_dir = scratch("iso").string();
  cfg.attack_enabled = false;
  auto rep = run_campaign(cfg);
  REQUIRE(rep.rows.size() == 4);
  std::size_t ok = 0;
  for (const auto& r : rep.rows) {
    ok += r.status == "ok";
    if (r.status != "ok") CHECK_FALSE(r.error.empty());
  }
  CHECK(ok == 1);
  CHECK(rep.rows[0].attack_outcome.empty());
}

TEST_CASE("campaign: aggregate means") {
  auto one = aggregate({row("heuristic", 8, 0.1, 4)});
  REQUIRE(one.size() == 1);
  CHECK(one[0].mean_bit_error_rate == 0.1);
  CHECK(one[0].mean_dip_count == 4.0);
  auto two = aggregate({row("heuristic", 8, 0.1, 4), row("heuristic", 8, 0.3, 6), row("heuristic", 16, 0.5, 9),
                        row("heuristic", 8, 0.9, 100, false)});
  REQUIRE(two.size() == 2);
  CHECK(two[0].key_width == 8);
  CHECK(two[0].runs == 3);
  CHECK(two[0].ok_runs == 2);
  CHECK(two[0].mean_bit_error_rate == doctest::Approx(0.2));
  CHECK(two[0].mean_dip_count == 5.0);
  CHECK(two[1].mean_bit_error_rate == 0.5);
  CHECK_THROWS(aggregate({}));
}

TEST_CASE("campaign: csv layout") {
  const auto& cols = csv_columns();
  for (const auto* c : {"bit_error_rate", "dip_count", "runtime_s", "planner", "key_width"})
    CHECK(std::find(cols.begin(), cols.end(), c) != cols.end());
  auto csv = rows_to_csv({row("heuristic", 8, 0.1, 4)});
  std::istringstream is(csv);
  std::string header, line;
  std::getline(is, header);
  std::getline(is, line);
  CHECK(std::count(header.begin(), header.end(), ',') == static_cast<long>(cols.size() - 1));
  CHECK(line.find("0.10000000000000001") != std::string::npos);
  auto summary = format_summary(aggregate({row("heuristic", 8, 0.1, 4)}));
  CHECK(summary.find("heuristic") != std::string::npos);
}

TEST_CASE("campaign: config parsing") {
  auto j = nlohmann::json::parse(R"({"circuits":["c17.bench"],"key_widths":[4],"styles":["hybrid"],"seeds":[1,2]})");
  auto c = campaign_config_from_json(j, oracle::data_dir() / "iscas85");
  CHECK(c.circuits[0] == (oracle::data_dir() / "iscas85" / "c17.bench").lexically_normal().string());
  CHECK(c.seeds.size() == 2);
  CHECK_THROWS(campaign_config_from_json(nlohmann::json::parse(R"({"circuits":["a"],"bogus":1})")));
  CHECK_THROWS(campaign_config_from_json(nlohmann::json::parse(R"({"circuits":["a"],"styles":["rot"]})")));
  CHECK_THROWS(campaign_config_from_json(nlohmann::json::parse(R"({"circuits":[]})")));
  CHECK(cell_id("c17", 8, "hybrid", std::nullopt) == "c17_k8_hybrid");
  CHECK(cell_id("c17", 8, "hybrid", 3) == "c17_k8_hybrid_s3");
}
