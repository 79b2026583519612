// Lock compiler: applies a validated LockPlan to a key-free netlist.
//
// Inserted logic uses 2-input gates only. For every target w the original
// driver is renamed to a fresh `lk_<n>` signal and the lock structure drives
// w itself, so all former sinks of w (output declarations included) read the
// locked value and port names stay stable. Lock structures read pre-lock
// signals.
//
// Styles, with k a key input and c its correct bit:
//   xor_xnor          w' = XOR(w, k) for c = 0, XNOR(w, k) for c = 1
//   mux_lock          w' = mux(k, w, d) for c = 0, mux(k, d, w) for c = 1
//   perturb_restore   w' = XOR(w, AND(p, NOT r)), p = AND_j lit(h_j, b_j),
//                     r = AND_j lit(k_j, c_j)
//   pairwise_subgraph w1' = mux(k, w1, w2), w2' = mux(k, w2, w1) for c = 0,
//                     data inputs swapped for c = 1
// where mux(s, a, b) = OR(AND(NOT s, a), AND(s, b)).

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "netlock/lock_plan.hpp"
#include "netlock/netlist.hpp"

namespace netlock {

class CompileError : public Error {
 public:
  explicit CompileError(std::vector<PlanViolation> violations);
  const std::vector<PlanViolation>& violations() const { return violations_; }

 private:
  std::vector<PlanViolation> violations_;
};

/// Mutable view of a netlist being locked. The apply_* functions below edit
/// it in place; compile_plan drives them.
class LockContext {
 public:
  explicit LockContext(const Netlist& original, std::uint32_t key_width);

  /// Name of key input `bit`.
  const std::string& key(std::uint32_t bit) const { return data_.key_inputs.at(bit); }
  /// Pre-lock value of `signal` (the renamed driver once it has been locked).
  std::string original(const std::string& signal) const;
  /// Detach `target` from its driver: the driver now feeds a fresh signal
  /// that is returned, and the caller must drive `target` with a new gate.
  std::string detach(const std::string& target);

  std::string add_gate(GateKind kind, std::vector<std::string> fanin);
  void add_gate_named(std::string output, GateKind kind, std::vector<std::string> fanin);
  /// Balanced AND tree over `terms` (returns the term itself for one input).
  std::string and_tree(std::vector<std::string> terms);
  std::string literal(const std::string& signal, bool polarity);

  std::size_t added_gates() const { return added_; }
  Netlist finish(KeyVector correct_key) &&;

 private:
  std::string fresh();

  NetlistData data_;
  std::unordered_map<std::string, std::size_t> driver_;  // signal -> gate index
  std::unordered_map<std::string, std::string> original_;
  std::size_t next_id_ = 0;
  std::size_t added_ = 0;
};

void apply_xor_xnor(LockContext& ctx, const std::string& target, std::uint32_t key_bit, bool correct);
void apply_mux_lock(LockContext& ctx, const std::string& target, const std::string& decoy, std::uint32_t key_bit,
                    bool correct);
void apply_perturb_restore(LockContext& ctx, const std::string& target, const std::vector<HelperSignal>& helpers,
                           const std::vector<std::uint32_t>& key_bits, const std::vector<bool>& correct);
void apply_pairwise_subgraph(LockContext& ctx, const std::string& target1, const std::string& target2,
                             std::uint32_t key_bit, bool correct);

/// Validates the plan (throws CompileError on violations) and applies every
/// instance in order. Key inputs are keyinput0..key_width-1.
Netlist compile_plan(const Netlist& original, const LockPlan& plan, const PlanBounds& bounds = {});

struct OverheadMetrics {
  double gate_overhead_ratio = 0.0;
  std::size_t key_gate_count = 0;
  std::size_t key_input_count = 0;
};

OverheadMetrics overhead(const Netlist& original, const Netlist& locked);
nlohmann::json to_json(const OverheadMetrics& m);

}  // namespace netlock
