#include "netlock/verification.hpp"

#include "netlock/attack.hpp"
#include "netlock/bench_io.hpp"
#include "netlock/verilog.hpp"

namespace netlock {

VerificationReport verify_locked(const Netlist& original, const Netlist& locked, const VerificationOptions& opt) {
  VerificationReport r;
  try {
    const auto text = write_bench(locked);
    const auto back = parse_bench(text, locked.name());
    if (!(back == locked)) {
      r.parse_error = "bench round trip changed the netlist";
    } else if (emit_verilog(locked).empty()) {
      r.parse_error = "empty Verilog output";
    } else {
      r.parse_ok = true;
    }
  } catch (const std::exception& e) {
    r.parse_error = e.what();
  }
  r.overhead = overhead(original, locked);
  if (!r.parse_ok) return r;

  r.correct_key_sim = check_correct_key(original, locked, opt.check_patterns, opt.check_seed);
  r.correct_key_cec = !opt.sat_equivalence || cec_check(bind_key(locked, *locked.correct_key()), original).equivalent;
  r.correct_key_ok = r.correct_key_sim.match && r.correct_key_cec;
  r.corruption = measure_corruption(original, locked, opt.corruption);
  return r;
}

VerificationReport failed_verification(std::string error) {
  VerificationReport r;
  r.parse_error = std::move(error);
  return r;
}

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j = {{"parse_ok", r.parse_ok},
                      {"correct_key_ok", r.correct_key_ok},
                      {"correct_key_sim", to_json(r.correct_key_sim)},
                      {"correct_key_cec", r.correct_key_cec},
                      {"corruption", to_json(r.corruption)},
                      {"overhead", to_json(r.overhead)}};
  if (!r.parse_error.empty()) j["parse_error"] = r.parse_error;
  return j;
}

}  // namespace netlock
