#include "doctest.h"
#include "netlock/attack.hpp"
#include "netlock/bench_io.hpp"
#include "netlock/compiler.hpp"
#include "netlock/simulator.hpp"
#include "oracle.hpp"

using namespace netlock;

namespace {

LockPlan two_xor_c17() {
  LockPlan p;
  p.source_circuit = "c17";
  p.key_width = 2;
  p.instances = {{LockStyle::XorXnor, {"11"}, {0}, {true}, {}}, {LockStyle::XorXnor, {"22"}, {1}, {false}, {}}};
  return p;
}

}  // namespace

TEST_CASE("dip_attack: c17 with two xor key gates") {
  auto c17 = read_bench_file(oracle::iscas("c17"));
  auto l = compile_plan(c17, two_xor_c17());
  auto truth = oracle::brute_force_keys(l, c17);
  CnfFormula cons;
  auto r = dip_attack(l, c17, {}, &cons);
  CHECK(r.outcome == AttackOutcome::KeyRecovered);
  REQUIRE(r.recovered_key.has_value());
  CHECK(std::find(truth.begin(), truth.end(), r.recovered_key->to_uint()) != truth.end());
  CHECK(r.verified);
  CHECK(r.dip_count <= 32);
  CHECK(r.dips.size() == r.dip_count);
  CHECK(r.responses.size() == r.dip_count);
  for (std::size_t i = 0; i < r.dips.size(); ++i) CHECK(oracle::scalar_eval(c17, r.dips[i]) == r.responses[i]);
  CHECK(r.remaining_keys.exact);
  CHECK(r.remaining_keys.count == truth.size());
  CHECK(count_remaining_keys(cons).count == truth.size());
}

TEST_CASE("dip_attack: budget exhaustion") {
  auto c17 = read_bench_file(oracle::iscas("c17"));
  auto l = compile_plan(c17, two_xor_c17());
  auto r = dip_attack(l, c17, {0, 600.0});
  CHECK(r.outcome == AttackOutcome::BudgetExhausted);
  CHECK_FALSE(r.recovered_key.has_value());
  CHECK(to_string(AttackOutcome::Timeout) == "timeout");
  CHECK(to_json(r)["outcome"] == "budget_exhausted");
}

TEST_CASE("enumerate_keys: single xor lock has one correct key") {
  auto n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
  LockPlan p;
  p.source_circuit = "top";
  p.key_width = 1;
  p.instances = {{LockStyle::XorXnor, {"y"}, {0}, {false}, {}}};
  auto l = compile_plan(n, p);
  auto keys = enumerate_keys(l, n);
  REQUIRE(keys.size() == 1);
  CHECK(keys[0].to_string() == "0");
}

TEST_CASE("enumerate_keys: dead cone makes both keys correct") {
  auto n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\nd = OR(a, b)\n");
  LockPlan p;
  p.source_circuit = "top";
  p.key_width = 1;
  p.instances = {{LockStyle::XorXnor, {"d"}, {0}, {true}, {}}};
  auto l = compile_plan(n, p);
  CHECK(enumerate_keys(l, n).size() == 2);
  auto r = dip_attack(l, n);
  CHECK(r.outcome == AttackOutcome::KeyRecovered);
  CHECK(r.dip_count == 0);
  CHECK(r.remaining_keys.count == 2);
}

TEST_CASE("count_remaining_keys: free bits and cap") {
  CnfFormula f;
  for (int i = 0; i < 20; ++i) f.key_vars.push_back(f.new_var());
  auto r = count_remaining_keys(f, 65536);
  CHECK(r.count >= 65536);
  CHECK_FALSE(r.exact);
  CnfFormula g;
  for (int i = 0; i < 3; ++i) g.key_vars.push_back(g.new_var());
  g.add({1, 2});
  auto s = count_remaining_keys(g);
  CHECK(s.exact);
  CHECK(s.count == 6);
}

TEST_CASE("attack oracles agree on random small locks") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 40; ++t) {
    CAPTURE(t);
    auto n = oracle::random_circuit(rng, 4 + rng() % 5, 10 + rng() % 15, 1 + rng() % 3);
    auto p = oracle::random_plan(rng, n, 1 + rng() % 6);
    auto l = compile_plan(n, p);
    auto truth = oracle::brute_force_keys(l, n);
    auto keys = enumerate_keys(l, n);
    REQUIRE(keys.size() == truth.size());
    for (std::size_t i = 0; i < keys.size(); ++i) CHECK(keys[i].to_uint() == truth[i]);
    CHECK(std::find(truth.begin(), truth.end(), p.correct_key().to_uint()) != truth.end());
    auto r = dip_attack(l, n);
    REQUIRE(r.outcome == AttackOutcome::KeyRecovered);
    CHECK(std::find(truth.begin(), truth.end(), r.recovered_key->to_uint()) != truth.end());
    CHECK(r.remaining_keys.count == truth.size());
  }
}

TEST_CASE("cnf dimacs of the attack constraints parses back") {
  auto c17 = read_bench_file(oracle::iscas("c17"));
  auto l = compile_plan(c17, two_xor_c17());
  CnfFormula cons;
  dip_attack(l, c17, {}, &cons);
  auto text = to_dimacs(cons);
  CHECK(text.find("p cnf " + std::to_string(cons.num_vars) + " " + std::to_string(cons.clauses.size())) !=
        std::string::npos);
  CHECK(cons.key_vars.size() == 2);
}
