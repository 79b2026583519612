// Gate-level combinational netlist model.
//
// A Netlist is immutable once constructed and always satisfies the structural
// invariants (single driver, declared fan-ins, acyclic, driven outputs, gate
// arity, key/correct-key consistency). Gates are stored in a stable
// topological order, so the signal id of gate g's output is
// `input_count() + g`.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace netlock {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GateKind : std::uint8_t { And, Or, Nand, Nor, Xor, Xnor, Not, Buff };

std::string_view to_string(GateKind kind);

/// Case-insensitive; accepts `BUF` as an alias of `BUFF`.
std::optional<GateKind> parse_gate_kind(std::string_view text);

/// Inclusive fan-in bounds for a gate kind (max is SIZE_MAX for n-ary kinds).
std::pair<std::size_t, std::size_t> arity_bounds(GateKind kind);

struct Gate {
  std::string output;
  GateKind kind = GateKind::Buff;
  std::vector<std::string> fanin;

  bool operator==(const Gate&) const = default;
};

class KeyVector {
 public:
  KeyVector() = default;
  explicit KeyVector(std::vector<bool> bits) : bits_(std::move(bits)) {}

  /// Character i of `text` is key bit i.
  static KeyVector from_string(std::string_view text);
  /// Bit i is `(value >> i) & 1`; width must be <= 64.
  static KeyVector from_uint(std::uint64_t value, std::size_t width);

  std::size_t width() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<bool>& bits() const { return bits_; }
  std::string to_string() const;
  /// Inverse of from_uint; width must be <= 64.
  std::uint64_t to_uint() const;
  KeyVector with_flipped(std::size_t i) const;

  bool operator==(const KeyVector&) const = default;

 private:
  std::vector<bool> bits_;
};

/// Unchecked, mutable description of a circuit. Converting it into a Netlist
/// validates it.
struct NetlistData {
  std::string name;
  std::vector<std::string> primary_inputs;
  std::vector<std::string> key_inputs;  // index = key-bit position
  std::vector<std::string> primary_outputs;
  std::vector<Gate> gates;
  std::optional<KeyVector> correct_key;
};

enum class ViolationKind {
  InvalidIdentifier,
  DuplicateInput,
  DuplicateOutput,
  DuplicateDriver,
  DrivenInput,
  UndeclaredSignal,
  UndrivenOutput,
  GateArity,
  Cycle,
  KeyMismatch,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string subject;  // offending signal or gate output
  std::string message;
};

std::vector<Violation> validate(const NetlistData& data);

class NetlistError : public Error {
 public:
  explicit NetlistError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

using SignalId = std::uint32_t;

class Netlist {
 public:
  /// Throws NetlistError listing every violation if `data` is not a valid
  /// circuit. Gate order is normalized to a stable topological order
  /// (an already topological order is kept as is).
  explicit Netlist(NetlistData data);

  const std::string& name() const { return data().name; }
  const std::vector<std::string>& primary_inputs() const { return data().primary_inputs; }
  const std::vector<std::string>& key_inputs() const { return data().key_inputs; }
  const std::vector<std::string>& primary_outputs() const { return data().primary_outputs; }
  const std::vector<Gate>& gates() const { return data().gates; }
  const std::optional<KeyVector>& correct_key() const { return data().correct_key; }
  bool is_locked() const { return !data().key_inputs.empty(); }
  const NetlistData& data() const;

  std::size_t signal_count() const;
  std::size_t gate_count() const { return gates().size(); }
  /// Primary plus key inputs; they occupy signal ids [0, input_count()).
  std::size_t input_count() const { return primary_inputs().size() + key_inputs().size(); }

  /// Signals in declaration order: primary inputs, key inputs, gate outputs.
  const std::string& signal_name(SignalId id) const;
  std::optional<SignalId> find(std::string_view name) const;

  SignalId gate_output(std::size_t gate) const { return static_cast<SignalId>(input_count() + gate); }
  std::span<const SignalId> gate_fanin(std::size_t gate) const;
  /// Gate index driving `id`, or nullopt for inputs.
  std::optional<std::size_t> driver(SignalId id) const;
  /// Gates reading `id` (each gate listed once, ascending).
  std::span<const std::uint32_t> sinks(SignalId id) const;
  std::span<const SignalId> output_ids() const;
  bool is_output(SignalId id) const;

  /// Copy of the underlying data with a different correct key.
  Netlist with_correct_key(std::optional<KeyVector> key) const;

  /// Structural identity: same name, signals, gates and orders.
  bool operator==(const Netlist& other) const;

 private:
  struct Index;
  std::shared_ptr<const Index> index_;
};

std::vector<Violation> validate(const Netlist& netlist);

/// Replace every key input by its bit in `key`, fold constants with local
/// Boolean identities and sweep gates that no longer reach an output.
/// Gates reduced to a single live fan-in become BUFF/NOT; constants that reach
/// an output are materialized as XOR(x, x) / XNOR(x, x) over the first
/// primary input.
Netlist bind_key(const Netlist& locked, const KeyVector& key);

}  // namespace netlock
