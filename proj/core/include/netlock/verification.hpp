// Candidate verification: serialization round trip, correct-key behaviour
// (simulation and SAT equivalence), wrong-key corruption and overhead.

#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "netlock/compiler.hpp"
#include "netlock/netlist.hpp"
#include "netlock/simulator.hpp"

namespace netlock {

struct VerificationOptions {
  std::size_t check_patterns = 4096;
  std::uint64_t check_seed = 1;
  CorruptionOptions corruption;
  bool sat_equivalence = true;
};

struct VerificationReport {
  bool parse_ok = false;
  std::string parse_error;
  KeyCheck correct_key_sim;
  bool correct_key_cec = false;
  bool correct_key_ok = false;
  CorruptionEstimate corruption;
  OverheadMetrics overhead;
};

/// parse_ok: the locked netlist writes to `.bench` and Verilog and the bench
/// text re-parses to a structurally identical netlist. correct_key_ok: the
/// simulation check matches and (if enabled) bind_key(locked, correct key) is
/// SAT-equivalent to `original`.
VerificationReport verify_locked(const Netlist& original, const Netlist& locked, const VerificationOptions& options = {});

/// Report for a candidate that failed before a netlist existed.
VerificationReport failed_verification(std::string error);

nlohmann::json to_json(const VerificationReport& r);

}  // namespace netlock
