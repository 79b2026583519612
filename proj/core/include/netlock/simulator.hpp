// Bit-parallel combinational simulation (64 patterns per machine word),
// correct-key checking and wrong-key corruption measurement.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "netlock/netlist.hpp"

namespace netlock {

/// Row-major block of pattern lanes: `rows` signals × `words` 64-bit words.
class PatternBlock {
 public:
  PatternBlock() = default;
  PatternBlock(std::size_t rows, std::size_t words) : rows_(rows), words_(words), lanes_(rows * words, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t words() const { return words_; }
  std::size_t patterns() const { return words_ * 64; }
  std::span<std::uint64_t> row(std::size_t r) { return {lanes_.data() + r * words_, words_}; }
  std::span<const std::uint64_t> row(std::size_t r) const { return {lanes_.data() + r * words_, words_}; }
  bool bit(std::size_t r, std::size_t pattern) const { return (row(r)[pattern / 64] >> (pattern % 64)) & 1U; }
  void set_bit(std::size_t r, std::size_t pattern, bool v);

  bool operator==(const PatternBlock&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> lanes_;
};

/// Netlist flattened for repeated evaluation.
class Simulator {
 public:
  explicit Simulator(const Netlist& netlist);

  /// `inputs` has one row per primary input followed by one per key input.
  /// Returns one row per primary output.
  PatternBlock run(const PatternBlock& inputs) const;
  /// Like run() but returns one row per signal (signal-id order).
  PatternBlock run_signals(const PatternBlock& inputs) const;

  std::size_t input_rows() const { return n_inputs_; }
  std::size_t output_rows() const { return outputs_.size(); }

 private:
  struct Op {
    GateKind kind;
    std::uint32_t fanin_begin;
    std::uint32_t fanin_end;
  };
  std::size_t n_inputs_;
  std::vector<Op> ops_;
  std::vector<std::uint32_t> fanin_;
  std::vector<std::uint32_t> outputs_;
};

/// Evaluate with a key broadcast to every lane. `inputs` has one row per
/// primary input; `key` must be present iff the netlist has key inputs.
PatternBlock evaluate(const Netlist& netlist, const PatternBlock& inputs, const std::optional<KeyVector>& key = {});

/// Single-pattern convenience wrapper (input bits in primary-input order).
std::vector<bool> evaluate_pattern(const Netlist& netlist, const std::vector<bool>& inputs,
                                   const std::optional<KeyVector>& key = {});

/// Circuits with at most this many primary inputs are simulated exhaustively.
inline constexpr std::size_t kExhaustiveInputLimit = 12;

/// Every assignment of `inputs` variables (pattern p sets input i to bit i of
/// p); unused lanes of the last word repeat pattern 0.
PatternBlock exhaustive_patterns(std::size_t inputs);
/// `count` patterns (rounded up to a whole word) of uniform random bits.
PatternBlock random_patterns(std::size_t inputs, std::size_t count, std::mt19937_64& rng);
/// Exhaustive when inputs <= kExhaustiveInputLimit, random otherwise.
PatternBlock input_patterns(std::size_t inputs, std::size_t random_count, std::uint64_t seed, bool* exhaustive = nullptr);
/// Number of meaningful patterns in a block from input_patterns().
std::size_t pattern_count(std::size_t inputs, const PatternBlock& block, bool exhaustive);

struct KeyCheck {
  bool match = false;
  std::uint64_t mismatches = 0;  // patterns with at least one differing output
  std::uint64_t patterns = 0;
  bool exhaustive = false;
};

/// Compare `locked` under `key` against `original` on primary inputs matched
/// by name. Throws Error when the primary-input sets or output counts differ.
KeyCheck check_key(const Netlist& original, const Netlist& locked, const KeyVector& key, std::size_t patterns = 4096,
                   std::uint64_t seed = 1);
/// check_key with the locked netlist's own correct key.
KeyCheck check_correct_key(const Netlist& original, const Netlist& locked, std::size_t patterns = 4096,
                           std::uint64_t seed = 1);

struct CorruptionEstimate {
  double bit_error_rate = 0.0;
  double pattern_error_rate = 0.0;
  std::uint64_t samples_inputs = 0;
  std::uint64_t samples_keys = 0;
  std::uint64_t seed = 0;
};

struct CorruptionOptions {
  std::size_t inputs = 256;
  std::size_t keys = 16;
  std::uint64_t seed = 1;
};

/// Wrong keys are drawn uniformly, redrawing any that equal the correct key.
CorruptionEstimate measure_corruption(const Netlist& original, const Netlist& locked, const CorruptionOptions& options = {});

nlohmann::json to_json(const KeyCheck& c);
nlohmann::json to_json(const CorruptionEstimate& c);

/// Maps primary inputs of `from` onto the order of `to`; throws on mismatch.
std::vector<std::size_t> input_permutation(const Netlist& from, const Netlist& to);

}  // namespace netlock
