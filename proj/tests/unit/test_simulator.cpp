#include "doctest.h"
#include "netlock/bench_io.hpp"
#include "netlock/compiler.hpp"
#include "netlock/simulator.hpp"
#include "oracle.hpp"

using namespace netlock;

TEST_CASE("simulator: AND and c17 all-zero pattern") {
  auto a = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
  CHECK(evaluate_pattern(a, {true, true}) == std::vector<bool>{true});
  CHECK(evaluate_pattern(a, {true, false}) == std::vector<bool>{false});
  auto c17 = read_bench_file(oracle::iscas("c17"));
  // First-level NANDs go high, so both output NANDs see (1,1) and go low.
  auto zero = std::vector<bool>(5, false);
  CHECK(evaluate_pattern(c17, zero) == std::vector<bool>{false, false});
  CHECK(evaluate_pattern(c17, zero) == oracle::scalar_eval(c17, zero));
}

TEST_CASE("simulator: lanes match scalar evaluation") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 40; ++t) {
    auto n = oracle::random_circuit(rng, 7, 30, 4);
    auto block = random_patterns(7, 128, rng);
    auto out = evaluate(n, block);
    REQUIRE(out.rows() == 4);
    for (std::size_t p = 0; p < block.patterns(); ++p) {
      std::vector<bool> xb;
      for (std::size_t i = 0; i < 7; ++i) xb.push_back(block.bit(i, p));
      auto ref = oracle::scalar_eval(n, xb);
      for (std::size_t o = 0; o < 4; ++o) CHECK(out.bit(o, p) == ref[o]);
    }
  }
}

TEST_CASE("simulator: exhaustive patterns") {
  auto b = exhaustive_patterns(3);
  CHECK(b.words() == 1);
  for (std::size_t p = 0; p < 8; ++p)
    for (std::size_t i = 0; i < 3; ++i) CHECK(b.bit(i, p) == (((p >> i) & 1) != 0));
  CHECK(exhaustive_patterns(8).words() == 4);
  bool ex = false;
  auto r = input_patterns(20, 100, 1, &ex);
  CHECK_FALSE(ex);
  CHECK(r.patterns() == 128);
  CHECK(pattern_count(20, r, ex) == 128);
  auto e = input_patterns(5, 100, 1, &ex);
  CHECK(ex);
  CHECK(pattern_count(5, e, ex) == 32);
}

TEST_CASE("simulator: key input checks") {
  auto l = parse_bench("# key=1\nINPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\ny = XNOR(a, keyinput0)\n");
  CHECK_THROWS(evaluate(l, exhaustive_patterns(1)));
  CHECK_THROWS(evaluate(l, exhaustive_patterns(1), KeyVector::from_string("10")));
  CHECK(evaluate_pattern(l, {true}, KeyVector::from_string("1")) == std::vector<bool>{true});
}

namespace {

LockPlan xor_plan(const std::string& t, bool c) {
  LockPlan p;
  p.source_circuit = "c17";
  p.key_width = 1;
  p.instances = {{LockStyle::XorXnor, {t}, {0}, {c}, {}}};
  return p;
}

}  // namespace

TEST_CASE("check_key: c17 correct and flipped") {
  auto n = read_bench_file(oracle::iscas("c17"));
  auto l = compile_plan(n, xor_plan("16", true));
  auto ok = check_correct_key(n, l);
  CHECK(ok.match);
  CHECK(ok.exhaustive);
  CHECK(ok.patterns == 32);
  CHECK(ok.mismatches == 0);
  auto bad = check_correct_key(n, l.with_correct_key(KeyVector::from_string("0")));
  CHECK_FALSE(bad.match);
  CHECK(bad.mismatches > 0);
  CHECK(check_key(n, n, KeyVector{}).match);
}

TEST_CASE("corruption: c17 xor on 16, exhaustive oracle") {
  auto n = read_bench_file(oracle::iscas("c17"));
  auto l = compile_plan(n, xor_plan("16", false));
  std::size_t bad = 0, bad_patterns = 0;
  for (std::uint64_t x = 0; x < 32; ++x) {
    auto a = oracle::scalar_eval(l, oracle::bits_of(x, 5), {true});
    auto b = oracle::scalar_eval(n, oracle::bits_of(x, 5));
    bad += (a[0] != b[0]) + (a[1] != b[1]);
    bad_patterns += a != b;
  }
  auto est = measure_corruption(n, l);
  CHECK(est.bit_error_rate == doctest::Approx(double(bad) / 64.0));
  CHECK(est.pattern_error_rate == doctest::Approx(double(bad_patterns) / 32.0));
  CHECK(est.pattern_error_rate >= est.bit_error_rate);
  CHECK(est.samples_inputs == 32);
}

TEST_CASE("corruption: dead cone gives zero") {
  auto n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\nd = OR(a, b)\n");
  LockPlan p;
  p.source_circuit = "top";
  p.key_width = 1;
  p.instances = {{LockStyle::XorXnor, {"d"}, {0}, {true}, {}}};
  auto l = compile_plan(n, p);
  auto est = measure_corruption(n, l);
  CHECK(est.bit_error_rate == 0.0);
  CHECK(est.pattern_error_rate == 0.0);
}

TEST_CASE("corruption: deterministic for a seed") {
  auto n = read_bench_file(oracle::iscas("c432"));
  LockPlan p;
  p.source_circuit = "c432";
  p.key_width = 1;
  p.instances = {{LockStyle::XorXnor, {n.gates()[n.gate_count() / 2].output}, {0}, {true}, {}}};
  auto l = compile_plan(n, p);
  auto a = measure_corruption(n, l, {256, 16, 9});
  auto b = measure_corruption(n, l, {256, 16, 9});
  CHECK(a.bit_error_rate == b.bit_error_rate);
  CHECK(a.samples_inputs == 256);
  CHECK(a.samples_keys == 16);
}

TEST_CASE("input_permutation: name matching") {
  auto a = parse_bench("INPUT(x)\nINPUT(y)\nOUTPUT(z)\nz = AND(x, y)\n");
  auto b = parse_bench("INPUT(y)\nINPUT(x)\nOUTPUT(z)\nz = AND(x, y)\n");
  auto perm = input_permutation(a, b);
  CHECK(perm == std::vector<std::size_t>{1, 0});
  auto c = parse_bench("INPUT(q)\nINPUT(x)\nOUTPUT(z)\nz = AND(x, q)\n");
  CHECK_THROWS(input_permutation(a, c));
}
