#include <span>

#include "netlock/netlist.hpp"

namespace netlock {

namespace {

// Value of a signal after folding: a constant or the signal itself.
struct Folded {
  enum class Tag : std::uint8_t { Zero, One, Live } tag = Tag::Live;
  bool is_const() const { return tag != Tag::Live; }
  bool value() const { return tag == Tag::One; }
  static Folded constant(bool v) { return {v ? Tag::One : Tag::Zero}; }
};

struct Simplified {
  bool is_const = false;
  bool value = false;
  GateKind kind = GateKind::Buff;
  std::vector<SignalId> fanin;
};

Simplified simplify(GateKind kind, std::span<const SignalId> fanin, const std::vector<Folded>& state) {
  Simplified r;
  auto constant = [&](bool v) {
    r.is_const = true;
    r.value = v;
    return r;
  };
  switch (kind) {
    case GateKind::Buff:
    case GateKind::Not: {
      const bool inv = kind == GateKind::Not;
      const auto& f = state[fanin[0]];
      if (f.is_const()) return constant(f.value() != inv);
      r.kind = kind;
      r.fanin = {fanin[0]};
      return r;
    }
    case GateKind::And:
    case GateKind::Nand:
    case GateKind::Or:
    case GateKind::Nor: {
      const bool is_and = kind == GateKind::And || kind == GateKind::Nand;
      const bool inv = kind == GateKind::Nand || kind == GateKind::Nor;
      // controlling value: 0 for AND, 1 for OR
      const bool controlling = !is_and;
      for (auto s : fanin) {
        const auto& f = state[s];
        if (f.is_const()) {
          if (f.value() == controlling) return constant(controlling != inv);
        } else {
          r.fanin.push_back(s);
        }
      }
      if (r.fanin.empty()) return constant(!controlling != inv);
      if (r.fanin.size() == 1) {
        r.kind = inv ? GateKind::Not : GateKind::Buff;
      } else {
        r.kind = kind;
      }
      return r;
    }
    case GateKind::Xor:
    case GateKind::Xnor: {
      bool parity = kind == GateKind::Xnor;
      for (auto s : fanin) {
        const auto& f = state[s];
        if (f.is_const()) {
          parity ^= f.value();
        } else {
          r.fanin.push_back(s);
        }
      }
      if (r.fanin.empty()) return constant(parity);
      if (r.fanin.size() == 1) {
        r.kind = parity ? GateKind::Not : GateKind::Buff;
      } else {
        r.kind = parity ? GateKind::Xnor : GateKind::Xor;
      }
      return r;
    }
  }
  return r;
}

}  // namespace

Netlist bind_key(const Netlist& locked, const KeyVector& key) {
  if (key.width() != locked.key_inputs().size()) {
    throw Error("bind_key: key has " + std::to_string(key.width()) + " bits but netlist has " +
                std::to_string(locked.key_inputs().size()) + " key inputs");
  }
  const std::size_t n_pi = locked.primary_inputs().size();
  std::vector<Folded> state(locked.signal_count());
  for (std::size_t i = 0; i < key.width(); ++i) state[n_pi + i] = Folded::constant(key[i]);

  std::vector<Simplified> simplified(locked.gate_count());
  for (std::size_t g = 0; g < locked.gate_count(); ++g) {
    simplified[g] = simplify(locked.gates()[g].kind, locked.gate_fanin(g), state);
    if (simplified[g].is_const) state[locked.gate_output(g)] = Folded::constant(simplified[g].value);
  }

  // Sweep: keep gates reachable backwards from outputs through live fan-ins.
  std::vector<bool> live(locked.signal_count(), false);
  bool need_const[2] = {false, false};
  for (auto o : locked.output_ids()) {
    if (state[o].is_const()) {
      need_const[state[o].value()] = true;
    } else {
      live[o] = true;
    }
  }
  for (std::size_t g = locked.gate_count(); g-- > 0;) {
    const SignalId out = locked.gate_output(g);
    if (!live[out] || simplified[g].is_const) continue;
    for (auto s : simplified[g].fanin) live[s] = true;
  }

  NetlistData data;
  data.name = locked.name();
  data.primary_inputs = locked.primary_inputs();
  data.primary_outputs = locked.primary_outputs();
  if ((need_const[0] || need_const[1]) && data.primary_inputs.empty()) {
    throw Error("bind_key: constant output in a netlist without primary inputs");
  }
  for (std::size_t g = 0; g < locked.gate_count(); ++g) {
    const SignalId out = locked.gate_output(g);
    const auto& s = simplified[g];
    const bool const_output = s.is_const && locked.is_output(out);
    if (!live[out] && !const_output) continue;
    Gate gate;
    gate.output = locked.signal_name(out);
    if (s.is_const) {
      // x ^ x = 0, ~(x ^ x) = 1
      gate.kind = s.value ? GateKind::Xnor : GateKind::Xor;
      gate.fanin = {data.primary_inputs.front(), data.primary_inputs.front()};
    } else {
      gate.kind = s.kind;
      for (auto in : s.fanin) gate.fanin.push_back(locked.signal_name(in));
    }
    data.gates.push_back(std::move(gate));
  }
  // Outputs wired straight to a key input.
  for (std::size_t i = 0; i < data.primary_outputs.size(); ++i) {
    SignalId o = locked.output_ids()[i];
    if (o >= n_pi && o < locked.input_count()) {
      throw Error("bind_key: output '" + data.primary_outputs[i] + "' is a key input");
    }
  }
  return Netlist(std::move(data));
}

}  // namespace netlock
