#include "doctest.h"
#include "netlock/analysis.hpp"
#include "netlock/bench_io.hpp"
#include "netlock/compiler.hpp"
#include "netlock/lock_plan.hpp"
#include "oracle.hpp"

using namespace netlock;

namespace {

Netlist c17() { return read_bench_file(oracle::iscas("c17")); }

LockInstance xor_on(const std::string& t, std::uint32_t bit, bool c) {
  return {LockStyle::XorXnor, {t}, {bit}, {c}, {}};
}

LockPlan plan_of(std::uint32_t w, std::vector<LockInstance> in) {
  LockPlan p;
  p.source_circuit = "c17";
  p.key_width = w;
  p.seed = 1;
  p.instances = std::move(in);
  return p;
}

// Value of `sig` in `n` for one input pattern, via the scalar model.
bool probe(const Netlist& n, const std::string& sig, const std::vector<bool>& pis, const std::vector<bool>& key) {
  NetlistData d = n.data();
  d.primary_outputs = {sig};
  return oracle::scalar_eval(d, pis, key)[0];
}

bool has_kind(const std::vector<PlanViolation>& vs, PlanViolationKind k) {
  for (const auto& v : vs)
    if (v.kind == k) return true;
  return false;
}

}  // namespace

TEST_CASE("plan: json round trip and schema") {
  auto p = plan_of(1, {xor_on("16", 0, true)});
  CHECK(check_plan_structure(p).empty());
  auto text = serialize_plan(p);
  CHECK(parse_plan(text) == p);
  CHECK(p.correct_key().to_string() == "1");
  CHECK_FALSE(p.is_hybrid());

  CHECK_THROWS_AS(parse_plan(R"({"version":"lockplan_v1","source_circuit":"c17","key_width":1,"seed":0,
    "instances":[{"style":"rot_lock","targets":["16"],"key_bits":[0],"correct_bits":[1],"helpers":[]}]})"),
                  PlanError);
  CHECK_THROWS_AS(parse_plan(R"({"version":"lockplan_v1","source_circuit":"c17","key_width":1,"seed":0,"extra":1,
    "instances":[{"style":"xor_xnor","targets":["16"],"key_bits":[0],"correct_bits":[1],"helpers":[]}]})"),
                  PlanError);
  CHECK_THROWS_AS(parse_plan("{not json"), PlanError);
}

TEST_CASE("plan: key-bit partition") {
  auto p = plan_of(2, {xor_on("16", 0, true), xor_on("19", 0, false)});
  CHECK_FALSE(check_plan_structure(p).empty());
  try {
    parse_plan(serialize_plan(p));
    FAIL("accepted overlapping bits");
  } catch (const PlanError& e) {
    CHECK(std::string(e.what()).find("partition") != std::string::npos);
  }
  CHECK_FALSE(check_plan_structure(plan_of(0, {})).empty());
}

TEST_CASE("validate_plan: netlist rules") {
  auto n = c17();
  LockInstance mux{LockStyle::MuxLock, {"11"}, {0}, {false}, {{"22", true}}};
  CHECK(has_kind(validate_plan(plan_of(1, {mux}), n), PlanViolationKind::CycleRisk));
  mux.helpers[0].signal = "10";
  CHECK(validate_plan(plan_of(1, {mux}), n).empty());

  LockInstance pw{LockStyle::PairwiseSubgraph, {"10", "19"}, {0}, {true}, {}};
  CHECK(validate_plan(plan_of(1, {pw}), n).empty());
  pw.targets = {"11", "16"};
  CHECK(has_kind(validate_plan(plan_of(1, {pw}), n), PlanViolationKind::CycleRisk));

  CHECK(has_kind(validate_plan(plan_of(1, {xor_on("1", 0, true)}), n), PlanViolationKind::InvalidTarget));
  CHECK(has_kind(validate_plan(plan_of(1, {xor_on("99", 0, true)}), n), PlanViolationKind::UnknownSignal));

  LockInstance pr{LockStyle::PerturbRestore, {"22"}, {0, 1}, {true, false}, {}};
  CHECK(has_kind(validate_plan(plan_of(2, {pr}), n), PlanViolationKind::Structure));
  pr.helpers = {{"10", true}, {"11", true}, {"19", true}};
  CHECK(validate_plan(plan_of(2, {pr}), n).empty());
  CHECK(has_kind(validate_plan(plan_of(2, {pr}), n, {1, 2}), PlanViolationKind::HelperCount));
}

TEST_CASE("validate_plan: combined rewiring cycles are caught") {
  auto n = c17();
  // Decoy 19 for target 10 and decoy 10 for target 19 are each legal alone.
  LockInstance a{LockStyle::MuxLock, {"10"}, {0}, {false}, {{"19", true}}};
  LockInstance b{LockStyle::MuxLock, {"19"}, {1}, {false}, {{"10", true}}};
  auto vs = validate_plan(plan_of(2, {a, b}), n);
  // Lock structures read pre-lock signals, so this stays acyclic.
  CHECK(vs.empty());
  auto locked = compile_plan(n, plan_of(2, {a, b}));
  CHECK(validate(locked).empty());
}

TEST_CASE("compiler: xor_xnor gate counts and overhead") {
  auto n = c17();
  auto one = compile_plan(n, plan_of(1, {xor_on("16", 0, true)}));
  CHECK(one.gate_count() == 7);
  auto m = overhead(n, one);
  CHECK(m.gate_overhead_ratio == doctest::Approx(1.0 / 6.0));
  CHECK(m.key_gate_count == 1);
  CHECK(m.key_input_count == 1);

  auto two = compile_plan(n, plan_of(2, {xor_on("16", 0, true), xor_on("19", 1, false)}));
  CHECK(two.gate_count() == 8);
  CHECK(overhead(n, two).key_input_count == 2);
  auto zero = overhead(n, n);
  CHECK(zero.gate_overhead_ratio == 0.0);
  CHECK(zero.key_gate_count == 0);
  CHECK_THROWS_AS(compile_plan(n, plan_of(1, {xor_on("1", 0, true)})), CompileError);
}

TEST_CASE("compiler: xor_xnor semantics") {
  auto n = c17();
  for (bool c : {false, true}) {
    auto l = compile_plan(n, plan_of(1, {xor_on("16", 0, c)}));
    CHECK(l.correct_key()->to_string() == (c ? "1" : "0"));
    for (std::uint64_t x = 0; x < 32; ++x) {
      auto xb = oracle::bits_of(x, 5);
      bool w = probe(n, "16", xb, {});
      CHECK(probe(l, "16", xb, {c}) == w);
      CHECK(probe(l, "16", xb, {!c}) == !w);
    }
  }
}

TEST_CASE("compiler: mux_lock semantics") {
  auto n = c17();
  for (bool c : {false, true}) {
    LockInstance mux{LockStyle::MuxLock, {"16"}, {0}, {c}, {{"10", true}}};
    auto l = compile_plan(n, plan_of(1, {mux}));
    CHECK(overhead(n, l).key_gate_count == 4);
    for (std::uint64_t x = 0; x < 32; ++x) {
      auto xb = oracle::bits_of(x, 5);
      CHECK(probe(l, "16", xb, {c}) == probe(n, "16", xb, {}));
      CHECK(probe(l, "16", xb, {!c}) == probe(n, "10", xb, {}));
    }
  }
}

TEST_CASE("compiler: perturb_restore semantics") {
  auto n = c17();
  LockInstance pr{LockStyle::PerturbRestore, {"22"}, {0, 1}, {true, false}, {{"11", true}, {"19", false}}};
  auto l = compile_plan(n, plan_of(2, {pr}));
  CHECK(validate(l).empty());
  for (std::uint64_t k = 0; k < 4; ++k) {
    auto kb = oracle::bits_of(k, 2);
    bool correct = kb[0] && !kb[1];
    for (std::uint64_t x = 0; x < 32; ++x) {
      auto xb = oracle::bits_of(x, 5);
      bool w = probe(n, "22", xb, {});
      bool p = probe(n, "11", xb, {}) && !probe(n, "19", xb, {});
      CHECK(probe(l, "22", xb, kb) == (correct ? w : (w != p)));
    }
  }
}

TEST_CASE("compiler: perturb corruption shrinks with more helpers") {
  auto n = c17();
  auto ber = [&](std::vector<HelperSignal> hs) {
    LockInstance pr{LockStyle::PerturbRestore, {"23"}, {0, 1}, {false, false}, std::move(hs)};
    auto l = compile_plan(n, plan_of(2, {pr}));
    std::size_t bad = 0, total = 0;
    for (std::uint64_t k = 1; k < 4; ++k)
      for (std::uint64_t x = 0; x < 32; ++x) {
        auto xb = oracle::bits_of(x, 5);
        auto a = oracle::scalar_eval(l, xb, oracle::bits_of(k, 2));
        auto b = oracle::scalar_eval(n, xb);
        for (std::size_t o = 0; o < a.size(); ++o, ++total) bad += a[o] != b[o];
      }
    return double(bad) / double(total);
  };
  double one = ber({{"10", true}});
  double two = ber({{"10", true}, {"22", true}});
  CHECK(two < one);
  CHECK(two > 0.0);
}

TEST_CASE("compiler: pairwise_subgraph semantics") {
  auto n = c17();
  LockInstance pw{LockStyle::PairwiseSubgraph, {"10", "19"}, {0}, {true}, {}};
  auto l = compile_plan(n, plan_of(1, {pw}));
  CHECK(validate(l).empty());
  for (std::uint64_t x = 0; x < 32; ++x) {
    auto xb = oracle::bits_of(x, 5);
    CHECK(probe(l, "10", xb, {true}) == probe(n, "10", xb, {}));
    CHECK(probe(l, "19", xb, {true}) == probe(n, "19", xb, {}));
    CHECK(probe(l, "10", xb, {false}) == probe(n, "19", xb, {}));
    CHECK(probe(l, "19", xb, {false}) == probe(n, "10", xb, {}));
  }
}

TEST_CASE("compiler: random valid plans bind back to the original") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 60; ++t) {
    auto n = oracle::random_circuit(rng, 6, 20, 3);
    auto p = oracle::random_plan(rng, n, 1 + rng() % 6);
    auto l = compile_plan(n, p);
    CHECK(validate(l).empty());
    auto key = p.correct_key();
    auto b = bind_key(l, key);
    for (std::uint64_t x = 0; x < 64; ++x) {
      auto xb = oracle::bits_of(x, 6);
      CHECK(oracle::scalar_eval(l, xb, key.bits()) == oracle::scalar_eval(n, xb));
      CHECK(oracle::scalar_eval(b, xb) == oracle::scalar_eval(n, xb));
    }
  }
}

TEST_CASE("compiler: output names stay stable") {
  auto n = c17();
  auto l = compile_plan(n, plan_of(1, {xor_on("22", 0, false)}));
  CHECK(l.primary_outputs() == n.primary_outputs());
  CHECK(l.primary_inputs() == n.primary_inputs());
  CHECK(l.key_inputs() == std::vector<std::string>{"keyinput0"});
}
