#include "netlock/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace netlock {

std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::Nand: return "NAND";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Not: return "NOT";
    case GateKind::Buff: return "BUFF";
  }
  return "?";
}

std::optional<GateKind> parse_gate_kind(std::string_view text) {
  std::string upper(text);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "AND") return GateKind::And;
  if (upper == "OR") return GateKind::Or;
  if (upper == "NAND") return GateKind::Nand;
  if (upper == "NOR") return GateKind::Nor;
  if (upper == "XOR") return GateKind::Xor;
  if (upper == "XNOR") return GateKind::Xnor;
  if (upper == "NOT") return GateKind::Not;
  if (upper == "BUFF" || upper == "BUF") return GateKind::Buff;
  return std::nullopt;
}

std::pair<std::size_t, std::size_t> arity_bounds(GateKind kind) {
  constexpr auto many = std::numeric_limits<std::size_t>::max();
  switch (kind) {
    case GateKind::Not:
    case GateKind::Buff: return {1, 1};
    case GateKind::Xor:
    case GateKind::Xnor: return {2, 2};
    default: return {2, many};
  }
}

KeyVector KeyVector::from_string(std::string_view text) {
  std::vector<bool> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw Error("key bit string may only contain 0 and 1: '" + std::string(text) + "'");
    bits.push_back(c == '1');
  }
  return KeyVector(std::move(bits));
}

KeyVector KeyVector::from_uint(std::uint64_t value, std::size_t width) {
  if (width > 64) throw Error("KeyVector::from_uint supports at most 64 bits");
  std::vector<bool> bits(width);
  for (std::size_t i = 0; i < width; ++i) bits[i] = ((value >> i) & 1U) != 0;
  return KeyVector(std::move(bits));
}

std::string KeyVector::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (bool b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

std::uint64_t KeyVector::to_uint() const {
  if (bits_.size() > 64) throw Error("KeyVector::to_uint supports at most 64 bits");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) v |= std::uint64_t{1} << i;
  return v;
}

KeyVector KeyVector::with_flipped(std::size_t i) const {
  auto bits = bits_;
  bits.at(i) = !bits[i];
  return KeyVector(std::move(bits));
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::InvalidIdentifier: return "invalid_identifier";
    case ViolationKind::DuplicateInput: return "duplicate_input";
    case ViolationKind::DuplicateOutput: return "duplicate_output";
    case ViolationKind::DuplicateDriver: return "duplicate_driver";
    case ViolationKind::DrivenInput: return "driven_input";
    case ViolationKind::UndeclaredSignal: return "undeclared_signal";
    case ViolationKind::UndrivenOutput: return "undriven_output";
    case ViolationKind::GateArity: return "gate_arity";
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::KeyMismatch: return "key_mismatch";
  }
  return "?";
}

namespace {

std::string summarize(const std::vector<Violation>& violations) {
  std::string msg = "invalid netlist:";
  std::size_t shown = 0;
  for (const auto& v : violations) {
    if (shown++ == 8) {
      msg += " ... (" + std::to_string(violations.size()) + " violations)";
      break;
    }
    msg += " [" + std::string(to_string(v.kind)) + "] " + v.message + ";";
  }
  return msg;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
  });
}

// Stable topological order of gates: gates are visited in their stored order
// and each is emitted after its fan-in drivers. Returns an empty optional when
// a cycle is found, with `cycle_at` naming one gate output on it.
std::optional<std::vector<std::size_t>> stable_topo_order(
    const std::vector<Gate>& gates, const std::unordered_map<std::string_view, std::size_t>& driver_of,
    std::vector<std::string>* cycle_at) {
  enum : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<std::uint8_t> color(gates.size(), kWhite);
  std::vector<std::size_t> order;
  order.reserve(gates.size());
  bool cyclic = false;
  // (gate, next fan-in position)
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t root = 0; root < gates.size(); ++root) {
    if (color[root] != kWhite) continue;
    stack.emplace_back(root, 0);
    color[root] = kGrey;
    while (!stack.empty()) {
      auto& [g, pos] = stack.back();
      if (pos < gates[g].fanin.size()) {
        const auto& in = gates[g].fanin[pos++];
        auto it = driver_of.find(in);
        if (it == driver_of.end()) continue;
        std::size_t d = it->second;
        if (color[d] == kWhite) {
          color[d] = kGrey;
          stack.emplace_back(d, 0);
        } else if (color[d] == kGrey) {
          cyclic = true;
          if (cycle_at) cycle_at->push_back(gates[d].output);
        }
      } else {
        color[g] = kBlack;
        order.push_back(g);
        stack.pop_back();
      }
    }
  }
  if (cyclic) return std::nullopt;
  return order;
}

}  // namespace

NetlistError::NetlistError(std::vector<Violation> violations)
    : Error(summarize(violations)), violations_(std::move(violations)) {}

std::vector<Violation> validate(const NetlistData& data) {
  std::vector<Violation> out;
  auto add = [&](ViolationKind k, const std::string& subject, std::string msg) {
    out.push_back({k, subject, std::move(msg)});
  };

  std::unordered_set<std::string_view> inputs;
  auto check_ident = [&](const std::string& s) {
    if (!valid_identifier(s)) add(ViolationKind::InvalidIdentifier, s, "invalid identifier '" + s + "'");
  };
  for (const auto* list : {&data.primary_inputs, &data.key_inputs}) {
    for (const auto& s : *list) {
      check_ident(s);
      if (!inputs.insert(s).second) add(ViolationKind::DuplicateInput, s, "input '" + s + "' declared twice");
    }
  }

  std::unordered_map<std::string_view, std::size_t> driver_of;
  for (std::size_t g = 0; g < data.gates.size(); ++g) {
    const auto& gate = data.gates[g];
    check_ident(gate.output);
    if (inputs.contains(gate.output)) {
      add(ViolationKind::DrivenInput, gate.output, "input '" + gate.output + "' is also driven by a gate");
    }
    if (!driver_of.emplace(gate.output, g).second) {
      add(ViolationKind::DuplicateDriver, gate.output, "signal '" + gate.output + "' has more than one driver");
    }
    auto [lo, hi] = arity_bounds(gate.kind);
    if (gate.fanin.size() < lo || gate.fanin.size() > hi) {
      add(ViolationKind::GateArity, gate.output,
          "gate '" + gate.output + "' of kind " + std::string(to_string(gate.kind)) + " has " +
              std::to_string(gate.fanin.size()) + " fan-ins");
    }
  }
  for (const auto& gate : data.gates) {
    for (const auto& in : gate.fanin) {
      if (!inputs.contains(in) && !driver_of.contains(in)) {
        add(ViolationKind::UndeclaredSignal, in,
            "gate '" + gate.output + "' reads undeclared signal '" + in + "'");
      }
    }
  }

  std::unordered_set<std::string_view> outs;
  for (const auto& o : data.primary_outputs) {
    check_ident(o);
    if (!outs.insert(o).second) add(ViolationKind::DuplicateOutput, o, "output '" + o + "' declared twice");
    if (!inputs.contains(o) && !driver_of.contains(o)) {
      add(ViolationKind::UndrivenOutput, o, "output '" + o + "' is not driven");
    }
  }

  std::vector<std::string> cycle_at;
  if (!stable_topo_order(data.gates, driver_of, &cycle_at)) {
    for (const auto& s : cycle_at) add(ViolationKind::Cycle, s, "combinational cycle through '" + s + "'");
  }

  if (data.key_inputs.empty() != !data.correct_key.has_value()) {
    add(ViolationKind::KeyMismatch, data.name,
        data.key_inputs.empty() ? "correct key given for a netlist without key inputs"
                                : "locked netlist has no correct key");
  } else if (data.correct_key && data.correct_key->width() != data.key_inputs.size()) {
    add(ViolationKind::KeyMismatch, data.name,
        "correct key has " + std::to_string(data.correct_key->width()) + " bits but there are " +
            std::to_string(data.key_inputs.size()) + " key inputs");
  }
  return out;
}

struct Netlist::Index {
  NetlistData data;
  std::vector<std::string_view> names;  // views into data
  std::unordered_map<std::string_view, SignalId> ids;
  std::vector<SignalId> fanin_flat;
  std::vector<std::uint32_t> fanin_offset;  // gates + 1
  std::vector<std::uint32_t> sink_flat;
  std::vector<std::uint32_t> sink_offset;  // signals + 1
  std::vector<SignalId> outputs;
  std::vector<bool> output_flag;
};

Netlist::Netlist(NetlistData data) {
  auto violations = validate(data);
  if (!violations.empty()) throw NetlistError(std::move(violations));

  auto idx = std::make_shared<Index>();
  {
    std::unordered_map<std::string_view, std::size_t> driver_of;
    for (std::size_t g = 0; g < data.gates.size(); ++g) driver_of.emplace(data.gates[g].output, g);
    auto order = stable_topo_order(data.gates, driver_of, nullptr);
    std::vector<Gate> sorted;
    sorted.reserve(data.gates.size());
    for (auto g : *order) sorted.push_back(std::move(data.gates[g]));
    data.gates = std::move(sorted);
  }
  idx->data = std::move(data);
  const auto& d = idx->data;

  const std::size_t n_signals = d.primary_inputs.size() + d.key_inputs.size() + d.gates.size();
  idx->names.reserve(n_signals);
  for (const auto& s : d.primary_inputs) idx->names.push_back(s);
  for (const auto& s : d.key_inputs) idx->names.push_back(s);
  for (const auto& g : d.gates) idx->names.push_back(g.output);
  idx->ids.reserve(n_signals);
  for (SignalId i = 0; i < idx->names.size(); ++i) idx->ids.emplace(idx->names[i], i);

  idx->fanin_offset.reserve(d.gates.size() + 1);
  idx->fanin_offset.push_back(0);
  std::vector<std::uint32_t> sink_count(n_signals, 0);
  for (std::size_t g = 0; g < d.gates.size(); ++g) {
    const std::size_t begin = idx->fanin_flat.size();
    for (const auto& in : d.gates[g].fanin) {
      SignalId s = idx->ids.at(in);
      idx->fanin_flat.push_back(s);
    }
    // count each (signal, gate) edge once
    std::vector<SignalId> uniq(idx->fanin_flat.begin() + static_cast<std::ptrdiff_t>(begin), idx->fanin_flat.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto s : uniq) ++sink_count[s];
    idx->fanin_offset.push_back(static_cast<std::uint32_t>(idx->fanin_flat.size()));
  }
  idx->sink_offset.assign(n_signals + 1, 0);
  for (std::size_t s = 0; s < n_signals; ++s) idx->sink_offset[s + 1] = idx->sink_offset[s] + sink_count[s];
  idx->sink_flat.assign(idx->sink_offset.back(), 0);
  std::vector<std::uint32_t> fill(idx->sink_offset.begin(), idx->sink_offset.end() - 1);
  for (std::uint32_t g = 0; g < d.gates.size(); ++g) {
    SignalId last = std::numeric_limits<SignalId>::max();
    std::vector<SignalId> fin(idx->fanin_flat.begin() + idx->fanin_offset[g],
                              idx->fanin_flat.begin() + idx->fanin_offset[g + 1]);
    std::sort(fin.begin(), fin.end());
    for (auto s : fin) {
      if (s == last) continue;
      last = s;
      idx->sink_flat[fill[s]++] = g;
    }
  }

  idx->output_flag.assign(n_signals, false);
  for (const auto& o : d.primary_outputs) {
    SignalId s = idx->ids.at(o);
    idx->outputs.push_back(s);
    idx->output_flag[s] = true;
  }
  index_ = std::move(idx);
}

const NetlistData& Netlist::data() const { return index_->data; }

std::size_t Netlist::signal_count() const { return index_->names.size(); }

const std::string& Netlist::signal_name(SignalId id) const {
  const auto& d = index_->data;
  const std::size_t np = d.primary_inputs.size();
  const std::size_t nk = d.key_inputs.size();
  if (id < np) return d.primary_inputs[id];
  if (id < np + nk) return d.key_inputs[id - np];
  return d.gates.at(id - np - nk).output;
}

std::optional<SignalId> Netlist::find(std::string_view name) const {
  auto it = index_->ids.find(name);
  if (it == index_->ids.end()) return std::nullopt;
  return it->second;
}

std::span<const SignalId> Netlist::gate_fanin(std::size_t gate) const {
  const auto& off = index_->fanin_offset;
  return {index_->fanin_flat.data() + off[gate], off[gate + 1] - off[gate]};
}

std::optional<std::size_t> Netlist::driver(SignalId id) const {
  if (id < input_count()) return std::nullopt;
  return id - input_count();
}

std::span<const std::uint32_t> Netlist::sinks(SignalId id) const {
  const auto& off = index_->sink_offset;
  return {index_->sink_flat.data() + off[id], off[id + 1] - off[id]};
}

std::span<const SignalId> Netlist::output_ids() const { return index_->outputs; }

bool Netlist::is_output(SignalId id) const { return index_->output_flag[id]; }

Netlist Netlist::with_correct_key(std::optional<KeyVector> key) const {
  NetlistData d = data();
  d.correct_key = std::move(key);
  return Netlist(std::move(d));
}

bool Netlist::operator==(const Netlist& other) const {
  const auto& a = data();
  const auto& b = other.data();
  return a.name == b.name && a.primary_inputs == b.primary_inputs && a.key_inputs == b.key_inputs &&
         a.primary_outputs == b.primary_outputs && a.gates == b.gates && a.correct_key == b.correct_key;
}

std::vector<Violation> validate(const Netlist& netlist) { return validate(netlist.data()); }

}  // namespace netlock
