#include "netlock/compiler.hpp"

#include <string>

#include "netlock/bench_io.hpp"

namespace netlock {

namespace {

std::string describe(const std::vector<PlanViolation>& vs) {
  std::string msg = "lock plan rejected:";
  for (const auto& v : vs) msg += " [" + std::string(to_string(v.kind)) + "] " + v.message + ";";
  return msg;
}

}  // namespace

CompileError::CompileError(std::vector<PlanViolation> violations)
    : Error(describe(violations)), violations_(std::move(violations)) {}

LockContext::LockContext(const Netlist& original, std::uint32_t key_width) : data_(original.data()) {
  data_.key_inputs.reserve(key_width);
  for (std::uint32_t i = 0; i < key_width; ++i) data_.key_inputs.push_back(std::string(kKeyInputPrefix) + std::to_string(i));
  for (std::size_t g = 0; g < data_.gates.size(); ++g) driver_.emplace(data_.gates[g].output, g);
}

std::string LockContext::fresh() { return std::string(kLockPrefix) + std::to_string(next_id_++); }

std::string LockContext::original(const std::string& signal) const {
  auto it = original_.find(signal);
  return it == original_.end() ? signal : it->second;
}

std::string LockContext::detach(const std::string& target) {
  if (auto it = original_.find(target); it != original_.end()) return it->second;
  auto d = driver_.find(target);
  if (d == driver_.end()) throw Error("lock target '" + target + "' is not a gate output");
  auto renamed = fresh();
  const auto gate = d->second;
  data_.gates[gate].output = renamed;
  driver_.erase(d);
  driver_.emplace(renamed, gate);
  original_.emplace(target, renamed);
  return renamed;
}

void LockContext::add_gate_named(std::string output, GateKind kind, std::vector<std::string> fanin) {
  driver_.emplace(output, data_.gates.size());
  data_.gates.push_back({std::move(output), kind, std::move(fanin)});
  ++added_;
}

std::string LockContext::add_gate(GateKind kind, std::vector<std::string> fanin) {
  auto out = fresh();
  add_gate_named(out, kind, std::move(fanin));
  return out;
}

std::string LockContext::and_tree(std::vector<std::string> terms) {
  if (terms.empty()) throw Error("and_tree needs at least one term");
  while (terms.size() > 1) {
    std::vector<std::string> next;
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(add_gate(GateKind::And, {terms[i], terms[i + 1]}));
    if (terms.size() % 2 == 1) next.push_back(terms.back());
    terms = std::move(next);
  }
  return terms.front();
}

std::string LockContext::literal(const std::string& signal, bool polarity) {
  return polarity ? signal : add_gate(GateKind::Not, {signal});
}

Netlist LockContext::finish(KeyVector correct_key) && {
  data_.correct_key = std::move(correct_key);
  return Netlist(std::move(data_));
}

namespace {

// Gates driving `target` from a final 2-input gate; mux ends in OR(a0, a1).
void drive(LockContext& ctx, const std::string& target, GateKind kind, std::vector<std::string> fanin) {
  ctx.add_gate_named(target, kind, std::move(fanin));
}

void mux_into(LockContext& ctx, const std::string& target, const std::string& select, const std::string& when0,
              const std::string& when1) {
  auto inv = ctx.add_gate(GateKind::Not, {select});
  auto a0 = ctx.add_gate(GateKind::And, {inv, when0});
  auto a1 = ctx.add_gate(GateKind::And, {select, when1});
  drive(ctx, target, GateKind::Or, {a0, a1});
}

}  // namespace

void apply_xor_xnor(LockContext& ctx, const std::string& target, std::uint32_t key_bit, bool correct) {
  auto w = ctx.detach(target);
  drive(ctx, target, correct ? GateKind::Xnor : GateKind::Xor, {w, ctx.key(key_bit)});
}

void apply_mux_lock(LockContext& ctx, const std::string& target, const std::string& decoy, std::uint32_t key_bit,
                    bool correct) {
  auto w = ctx.detach(target);
  auto d = ctx.original(decoy);
  const auto& k = ctx.key(key_bit);
  if (correct) {
    mux_into(ctx, target, k, d, w);
  } else {
    mux_into(ctx, target, k, w, d);
  }
}

void apply_perturb_restore(LockContext& ctx, const std::string& target, const std::vector<HelperSignal>& helpers,
                           const std::vector<std::uint32_t>& key_bits, const std::vector<bool>& correct) {
  auto w = ctx.detach(target);
  std::vector<std::string> detect;
  for (const auto& h : helpers) detect.push_back(ctx.literal(ctx.original(h.signal), h.polarity));
  auto p = ctx.and_tree(std::move(detect));
  std::vector<std::string> restore;
  for (std::size_t j = 0; j < key_bits.size(); ++j) restore.push_back(ctx.literal(ctx.key(key_bits[j]), correct[j]));
  auto r = ctx.and_tree(std::move(restore));
  auto not_r = ctx.add_gate(GateKind::Not, {r});
  auto flip = ctx.add_gate(GateKind::And, {p, not_r});
  drive(ctx, target, GateKind::Xor, {w, flip});
}

void apply_pairwise_subgraph(LockContext& ctx, const std::string& target1, const std::string& target2,
                             std::uint32_t key_bit, bool correct) {
  auto w1 = ctx.detach(target1);
  auto w2 = ctx.detach(target2);
  const auto& k = ctx.key(key_bit);
  if (correct) {
    mux_into(ctx, target1, k, w2, w1);
    mux_into(ctx, target2, k, w1, w2);
  } else {
    mux_into(ctx, target1, k, w1, w2);
    mux_into(ctx, target2, k, w2, w1);
  }
}

Netlist compile_plan(const Netlist& original, const LockPlan& plan, const PlanBounds& bounds) {
  auto violations = validate_plan(plan, original, bounds);
  if (!violations.empty()) throw CompileError(std::move(violations));

  LockContext ctx(original, plan.key_width);
  // Detach every target first so lock structures always read pre-lock values.
  for (const auto& inst : plan.instances)
    for (const auto& t : inst.targets) ctx.detach(t);

  for (const auto& inst : plan.instances) {
    switch (inst.style) {
      case LockStyle::XorXnor:
        apply_xor_xnor(ctx, inst.targets[0], inst.key_bits[0], inst.correct_bits[0]);
        break;
      case LockStyle::MuxLock:
        apply_mux_lock(ctx, inst.targets[0], inst.helpers[0].signal, inst.key_bits[0], inst.correct_bits[0]);
        break;
      case LockStyle::PerturbRestore:
        apply_perturb_restore(ctx, inst.targets[0], inst.helpers, inst.key_bits, inst.correct_bits);
        break;
      case LockStyle::PairwiseSubgraph:
        apply_pairwise_subgraph(ctx, inst.targets[0], inst.targets[1], inst.key_bits[0], inst.correct_bits[0]);
        break;
    }
  }
  return std::move(ctx).finish(plan.correct_key());
}

OverheadMetrics overhead(const Netlist& original, const Netlist& locked) {
  OverheadMetrics m;
  const auto before = original.gate_count();
  const auto after = locked.gate_count();
  m.key_gate_count = after > before ? after - before : 0;
  m.gate_overhead_ratio = before == 0 ? 0.0 : static_cast<double>(m.key_gate_count) / static_cast<double>(before);
  m.key_input_count = locked.key_inputs().size();
  return m;
}

nlohmann::json to_json(const OverheadMetrics& m) {
  return {{"gate_overhead_ratio", m.gate_overhead_ratio},
          {"key_gate_count", m.key_gate_count},
          {"key_input_count", m.key_input_count}};
}

}  // namespace netlock
