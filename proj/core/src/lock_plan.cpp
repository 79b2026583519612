#include "netlock/lock_plan.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "netlock/analysis.hpp"
#include "netlock/bench_io.hpp"

namespace netlock {

using nlohmann::json;

std::string_view to_string(LockStyle style) {
  switch (style) {
    case LockStyle::XorXnor: return "xor_xnor";
    case LockStyle::PerturbRestore: return "perturb_restore";
    case LockStyle::MuxLock: return "mux_lock";
    case LockStyle::PairwiseSubgraph: return "pairwise_subgraph";
  }
  return "?";
}

std::optional<LockStyle> parse_lock_style(std::string_view text) {
  for (auto s : kAllStyles)
    if (to_string(s) == text) return s;
  return std::nullopt;
}

KeyVector LockPlan::correct_key() const {
  std::vector<bool> bits(key_width, false);
  for (const auto& inst : instances) {
    for (std::size_t i = 0; i < inst.key_bits.size() && i < inst.correct_bits.size(); ++i) {
      if (inst.key_bits[i] < key_width) bits[inst.key_bits[i]] = inst.correct_bits[i];
    }
  }
  return KeyVector(std::move(bits));
}

bool LockPlan::is_hybrid() const {
  return std::any_of(instances.begin(), instances.end(),
                     [&](const LockInstance& i) { return i.style != instances.front().style; });
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw PlanError("schema violation at " + path + ": " + msg);
}

void check_fields(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed,
                  std::initializer_list<std::string_view> required) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error(path, "unknown field '" + key + "'");
    }
  }
  for (auto key : required) {
    if (!obj.contains(key)) schema_error(path, "missing required field '" + std::string(key) + "'");
  }
}

std::uint64_t get_unsigned(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected a non-negative integer");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  auto i = v.get<std::int64_t>();
  if (i < 0) schema_error(path, "expected a non-negative integer");
  return static_cast<std::uint64_t>(i);
}

bool get_bit(const json& v, const std::string& path) {
  if (v.is_boolean()) return v.get<bool>();
  auto u = get_unsigned(v, path);
  if (u > 1) schema_error(path, "expected 0 or 1");
  return u == 1;
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

const json& get_array(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array");
  return v;
}

LockInstance instance_from_json(const json& j, const std::string& path) {
  check_fields(j, path, {"style", "targets", "key_bits", "correct_bits", "helpers"},
               {"style", "targets", "key_bits", "correct_bits"});
  LockInstance inst;
  auto style_text = get_string(j["style"], path + ".style");
  auto style = parse_lock_style(style_text);
  if (!style) schema_error(path + ".style", "unknown style '" + style_text + "'");
  inst.style = *style;
  const auto& targets = get_array(j["targets"], path + ".targets");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    inst.targets.push_back(get_string(targets[i], path + ".targets[" + std::to_string(i) + "]"));
  }
  const auto& bits = get_array(j["key_bits"], path + ".key_bits");
  for (std::size_t i = 0; i < bits.size(); ++i) {
    auto p = path + ".key_bits[" + std::to_string(i) + "]";
    auto b = get_unsigned(bits[i], p);
    if (b > std::numeric_limits<std::uint32_t>::max()) schema_error(p, "key bit index out of range");
    inst.key_bits.push_back(static_cast<std::uint32_t>(b));
  }
  const auto& correct = get_array(j["correct_bits"], path + ".correct_bits");
  for (std::size_t i = 0; i < correct.size(); ++i) {
    inst.correct_bits.push_back(get_bit(correct[i], path + ".correct_bits[" + std::to_string(i) + "]"));
  }
  if (j.contains("helpers")) {
    const auto& helpers = get_array(j["helpers"], path + ".helpers");
    for (std::size_t i = 0; i < helpers.size(); ++i) {
      auto hp = path + ".helpers[" + std::to_string(i) + "]";
      check_fields(helpers[i], hp, {"signal", "polarity"}, {"signal"});
      HelperSignal h;
      h.signal = get_string(helpers[i]["signal"], hp + ".signal");
      if (helpers[i].contains("polarity")) h.polarity = get_bit(helpers[i]["polarity"], hp + ".polarity");
      inst.helpers.push_back(std::move(h));
    }
  }
  return inst;
}

}  // namespace

LockPlan plan_from_json(const json& j) {
  check_fields(j, "$", {"version", "source_circuit", "key_width", "seed", "instances"},
               {"version", "key_width", "instances"});
  if (get_string(j["version"], "$.version") != kLockPlanVersion) {
    schema_error("$.version", "expected \"" + std::string(kLockPlanVersion) + "\"");
  }
  LockPlan plan;
  if (j.contains("source_circuit")) plan.source_circuit = get_string(j["source_circuit"], "$.source_circuit");
  auto width = get_unsigned(j["key_width"], "$.key_width");
  if (width > 4096) schema_error("$.key_width", "key width above 4096");
  plan.key_width = static_cast<std::uint32_t>(width);
  if (j.contains("seed")) plan.seed = get_unsigned(j["seed"], "$.seed");
  const auto& insts = get_array(j["instances"], "$.instances");
  for (std::size_t i = 0; i < insts.size(); ++i) {
    plan.instances.push_back(instance_from_json(insts[i], "$.instances[" + std::to_string(i) + "]"));
  }
  auto problems = check_plan_structure(plan);
  if (!problems.empty()) {
    std::string msg = "invalid lock plan:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw PlanError(msg);
  }
  return plan;
}

LockPlan parse_plan(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PlanError(std::string("invalid JSON: ") + e.what());
  }
  return plan_from_json(j);
}

json to_json(const LockPlan& plan) {
  json insts = json::array();
  for (const auto& inst : plan.instances) {
    json helpers = json::array();
    for (const auto& h : inst.helpers) helpers.push_back({{"signal", h.signal}, {"polarity", h.polarity ? 1 : 0}});
    json correct = json::array();
    for (bool b : inst.correct_bits) correct.push_back(b ? 1 : 0);
    insts.push_back({{"style", to_string(inst.style)},
                     {"targets", inst.targets},
                     {"key_bits", inst.key_bits},
                     {"correct_bits", std::move(correct)},
                     {"helpers", std::move(helpers)}});
  }
  return {{"version", kLockPlanVersion},
          {"source_circuit", plan.source_circuit},
          {"key_width", plan.key_width},
          {"seed", plan.seed},
          {"instances", std::move(insts)}};
}

std::string serialize_plan(const LockPlan& plan) { return to_json(plan).dump(2) + "\n"; }

std::vector<std::string> check_plan_structure(const LockPlan& plan) {
  std::vector<std::string> out;
  if (plan.key_width == 0) out.push_back("key_width must be at least 1");
  if (plan.instances.empty()) out.push_back("plan has no lock instances");

  std::vector<int> owner(plan.key_width, -1);
  std::unordered_map<std::string, std::size_t> target_owner;
  for (std::size_t i = 0; i < plan.instances.size(); ++i) {
    const auto& inst = plan.instances[i];
    const std::string where = "instance " + std::to_string(i) + " (" + std::string(to_string(inst.style)) + ")";
    const bool pairwise = inst.style == LockStyle::PairwiseSubgraph;
    if (inst.targets.size() != (pairwise ? 2U : 1U)) {
      out.push_back(where + ": expected " + (pairwise ? "2 targets" : "1 target") + ", got " +
                    std::to_string(inst.targets.size()));
    }
    if (inst.style == LockStyle::PerturbRestore) {
      if (inst.key_bits.size() < 2) out.push_back(where + ": needs at least 2 key bits");
      if (inst.helpers.empty()) out.push_back(where + ": needs at least 1 helper signal");
    } else if (inst.key_bits.size() != 1) {
      out.push_back(where + ": needs exactly 1 key bit, got " + std::to_string(inst.key_bits.size()));
    }
    if (inst.style == LockStyle::MuxLock && inst.helpers.size() != 1) {
      out.push_back(where + ": needs exactly 1 decoy helper, got " + std::to_string(inst.helpers.size()));
    }
    if ((inst.style == LockStyle::XorXnor || pairwise) && !inst.helpers.empty()) {
      out.push_back(where + ": takes no helper signals");
    }
    std::unordered_set<std::string> seen_helpers;
    for (const auto& h : inst.helpers) {
      if (!seen_helpers.insert(h.signal).second) out.push_back(where + ": helper '" + h.signal + "' listed twice");
    }
    if (inst.correct_bits.size() != inst.key_bits.size()) {
      out.push_back(where + ": correct_bits has " + std::to_string(inst.correct_bits.size()) +
                    " entries for " + std::to_string(inst.key_bits.size()) + " key bits");
    }
    for (auto b : inst.key_bits) {
      if (b >= plan.key_width) {
        out.push_back(where + ": key bit " + std::to_string(b) + " outside key width " +
                      std::to_string(plan.key_width));
      } else if (owner[b] >= 0) {
        out.push_back("key-bit partition violation: bit " + std::to_string(b) + " claimed by instances " +
                      std::to_string(owner[b]) + " and " + std::to_string(i));
      } else {
        owner[b] = static_cast<int>(i);
      }
    }
    for (const auto& t : inst.targets) {
      auto [it, inserted] = target_owner.emplace(t, i);
      if (!inserted) {
        out.push_back("duplicate target '" + t + "' in instances " + std::to_string(it->second) + " and " +
                      std::to_string(i));
      }
    }
  }
  for (std::size_t b = 0; b < owner.size(); ++b) {
    if (owner[b] < 0) out.push_back("key-bit partition violation: bit " + std::to_string(b) + " unused");
  }
  return out;
}

std::string_view to_string(PlanViolationKind kind) {
  switch (kind) {
    case PlanViolationKind::Structure: return "structure";
    case PlanViolationKind::ReservedPrefix: return "reserved_prefix";
    case PlanViolationKind::LockedNetlist: return "locked_netlist";
    case PlanViolationKind::UnknownSignal: return "unknown_signal";
    case PlanViolationKind::InvalidTarget: return "invalid_target";
    case PlanViolationKind::HelperCount: return "helper_count";
    case PlanViolationKind::CycleRisk: return "cycle_risk";
  }
  return "?";
}

json to_json(const PlanViolation& v) {
  json j = {{"kind", to_string(v.kind)}, {"subject", v.subject}, {"message", v.message}};
  if (v.instance != std::numeric_limits<std::size_t>::max()) j["instance"] = v.instance;
  return j;
}

json to_json(const std::vector<PlanViolation>& vs) {
  json arr = json::array();
  for (const auto& v : vs) arr.push_back(to_json(v));
  return arr;
}

namespace {

// Dependency graph of the locked circuit: every original signal plus one
// "locked" node per target. Original sinks of a target read its locked node;
// lock structures read pre-lock signals.
class LockedGraph {
 public:
  explicit LockedGraph(const Netlist& n) : n_(n), locked_of_(n.signal_count(), kNone) {}

  struct Lock {
    std::vector<SignalId> targets;
    std::vector<SignalId> reads;
  };

  bool acyclic_with(const Lock& extra) const {
    std::vector<Lock> all = accepted_;
    all.push_back(extra);
    auto locked_of = locked_of_;
    for (std::size_t i = 0; i < extra.targets.size(); ++i) {
      locked_of[extra.targets[i]] = static_cast<std::uint32_t>(n_.signal_count() + target_count_ + i);
    }
    const std::size_t nodes = n_.signal_count() + target_count_ + extra.targets.size();

    std::vector<std::vector<std::uint32_t>> succ(nodes);
    std::vector<std::uint32_t> indeg(nodes, 0);
    auto edge = [&](std::uint32_t a, std::uint32_t b) {
      succ[a].push_back(b);
      ++indeg[b];
    };
    for (std::size_t g = 0; g < n_.gate_count(); ++g) {
      const SignalId out = n_.gate_output(g);
      for (auto in : n_.gate_fanin(g)) edge(locked_of[in] != kNone ? locked_of[in] : in, out);
    }
    for (const auto& lock : all) {
      for (auto t : lock.targets) {
        const auto node = locked_of[t];
        edge(t, node);
        for (auto r : lock.reads) edge(r, node);
      }
    }
    std::vector<std::uint32_t> queue;
    for (std::uint32_t v = 0; v < nodes; ++v)
      if (indeg[v] == 0) queue.push_back(v);
    std::size_t done = 0;
    while (done < queue.size()) {
      auto v = queue[done++];
      for (auto w : succ[v])
        if (--indeg[w] == 0) queue.push_back(w);
    }
    return done == nodes;
  }

  void accept(const Lock& lock) {
    for (auto t : lock.targets) locked_of_[t] = static_cast<std::uint32_t>(n_.signal_count() + target_count_++);
    accepted_.push_back(lock);
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  const Netlist& n_;
  std::vector<std::uint32_t> locked_of_;
  std::size_t target_count_ = 0;
  std::vector<Lock> accepted_;
};

}  // namespace

std::vector<PlanViolation> validate_plan(const LockPlan& plan, const Netlist& n, const PlanBounds& bounds) {
  constexpr auto kPlanLevel = std::numeric_limits<std::size_t>::max();
  std::vector<PlanViolation> out;
  for (auto& msg : check_plan_structure(plan)) out.push_back({PlanViolationKind::Structure, kPlanLevel, "", msg});
  if (n.is_locked()) {
    out.push_back({PlanViolationKind::LockedNetlist, kPlanLevel, n.name(), "netlist already has key inputs"});
  }
  for (SignalId s = 0; s < n.signal_count(); ++s) {
    const auto& name = n.signal_name(s);
    if (name.starts_with(kLockPrefix) || name.starts_with(kKeyInputPrefix)) {
      out.push_back({PlanViolationKind::ReservedPrefix, kPlanLevel, name,
                     "signal '" + name + "' uses a reserved prefix ('" + std::string(kLockPrefix) + "' or '" +
                         std::string(kKeyInputPrefix) + "')"});
    }
  }
  if (!out.empty()) return out;

  LockedGraph graph(n);
  for (std::size_t i = 0; i < plan.instances.size(); ++i) {
    const auto& inst = plan.instances[i];
    const auto before = out.size();
    auto bad = [&](PlanViolationKind k, const std::string& subject, std::string msg) {
      out.push_back({k, i, subject, "instance " + std::to_string(i) + ": " + std::move(msg)});
    };

    std::vector<SignalId> targets;
    for (const auto& t : inst.targets) {
      auto id = n.find(t);
      if (!id) {
        bad(PlanViolationKind::UnknownSignal, t, "target '" + t + "' does not exist");
      } else if (!n.driver(*id)) {
        bad(PlanViolationKind::InvalidTarget, t, "target '" + t + "' is a primary input, not a gate output");
      } else {
        targets.push_back(*id);
      }
    }
    std::vector<SignalId> helpers;
    for (const auto& h : inst.helpers) {
      auto id = n.find(h.signal);
      if (!id) {
        bad(PlanViolationKind::UnknownSignal, h.signal, "helper '" + h.signal + "' does not exist");
      } else {
        helpers.push_back(*id);
      }
    }
    if (inst.style == LockStyle::PerturbRestore &&
        (inst.helpers.size() < bounds.min_helpers || inst.helpers.size() > bounds.max_helpers)) {
      bad(PlanViolationKind::HelperCount, inst.targets.empty() ? "" : inst.targets.front(),
          "perturb_restore has " + std::to_string(inst.helpers.size()) + " helpers, allowed range is [" +
              std::to_string(bounds.min_helpers) + ", " + std::to_string(bounds.max_helpers) + "]");
    }
    if (out.size() != before || targets.size() != inst.targets.size()) continue;

    LockedGraph::Lock lock{targets, helpers};
    if (inst.style == LockStyle::MuxLock || inst.style == LockStyle::PerturbRestore) {
      const auto tfo = transitive_fanout(n, targets[0]);
      for (std::size_t h = 0; h < helpers.size(); ++h) {
        const auto& name = inst.helpers[h].signal;
        if (tfo[helpers[h]] || (inst.style == LockStyle::MuxLock && helpers[h] == targets[0])) {
          bad(PlanViolationKind::CycleRisk, name,
              std::string(inst.style == LockStyle::MuxLock ? "decoy '" : "helper '") + name +
                  "' lies in the transitive fanout of target '" + inst.targets[0] + "'");
        }
      }
    } else if (inst.style == LockStyle::PairwiseSubgraph) {
      const auto tfo0 = transitive_fanout(n, targets[0]);
      const auto tfo1 = transitive_fanout(n, targets[1]);
      if (tfo0[targets[1]] || tfo1[targets[0]]) {
        bad(PlanViolationKind::CycleRisk, inst.targets[1],
            "pairwise targets '" + inst.targets[0] + "' and '" + inst.targets[1] +
                "' lie on a common path (one is in the other's transitive fanout)");
      }
      lock.reads = {targets[0], targets[1]};
    }
    if (out.size() != before) continue;
    if (!graph.acyclic_with(lock)) {
      bad(PlanViolationKind::CycleRisk, inst.targets[0],
          "rewiring together with earlier instances creates a combinational cycle");
      continue;
    }
    graph.accept(lock);
  }
  return out;
}

}  // namespace netlock
