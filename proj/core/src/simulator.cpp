#include "netlock/simulator.hpp"

#include <bit>
#include <unordered_map>

namespace netlock {

void PatternBlock::set_bit(std::size_t r, std::size_t pattern, bool v) {
  auto& w = row(r)[pattern / 64];
  const auto mask = std::uint64_t{1} << (pattern % 64);
  w = v ? (w | mask) : (w & ~mask);
}

Simulator::Simulator(const Netlist& n) : n_inputs_(n.input_count()) {
  ops_.reserve(n.gate_count());
  for (std::size_t g = 0; g < n.gate_count(); ++g) {
    auto fin = n.gate_fanin(g);
    Op op{n.gates()[g].kind, static_cast<std::uint32_t>(fanin_.size()), 0};
    fanin_.insert(fanin_.end(), fin.begin(), fin.end());
    op.fanin_end = static_cast<std::uint32_t>(fanin_.size());
    ops_.push_back(op);
  }
  outputs_.assign(n.output_ids().begin(), n.output_ids().end());
}

PatternBlock Simulator::run_signals(const PatternBlock& inputs) const {
  if (inputs.rows() != n_inputs_) {
    throw Error("simulator expects " + std::to_string(n_inputs_) + " input rows, got " +
                std::to_string(inputs.rows()));
  }
  const std::size_t W = inputs.words();
  PatternBlock all(n_inputs_ + ops_.size(), W);
  for (std::size_t r = 0; r < n_inputs_; ++r) {
    auto src = inputs.row(r);
    std::copy(src.begin(), src.end(), all.row(r).begin());
  }
  std::uint64_t* v = all.row(0).data();
  for (std::size_t g = 0; g < ops_.size(); ++g) {
    const auto& op = ops_[g];
    std::uint64_t* out = v + (n_inputs_ + g) * W;
    const std::uint64_t* a = v + fanin_[op.fanin_begin] * W;
    std::copy(a, a + W, out);
    for (auto f = op.fanin_begin + 1; f < op.fanin_end; ++f) {
      const std::uint64_t* b = v + fanin_[f] * W;
      switch (op.kind) {
        case GateKind::And:
        case GateKind::Nand:
          for (std::size_t w = 0; w < W; ++w) out[w] &= b[w];
          break;
        case GateKind::Or:
        case GateKind::Nor:
          for (std::size_t w = 0; w < W; ++w) out[w] |= b[w];
          break;
        case GateKind::Xor:
        case GateKind::Xnor:
          for (std::size_t w = 0; w < W; ++w) out[w] ^= b[w];
          break;
        case GateKind::Not:
        case GateKind::Buff:
          break;
      }
    }
    if (op.kind == GateKind::Nand || op.kind == GateKind::Nor || op.kind == GateKind::Xnor ||
        op.kind == GateKind::Not) {
      for (std::size_t w = 0; w < W; ++w) out[w] = ~out[w];
    }
  }
  return all;
}

PatternBlock Simulator::run(const PatternBlock& inputs) const {
  const auto all = run_signals(inputs);
  PatternBlock result(outputs_.size(), inputs.words());
  for (std::size_t o = 0; o < outputs_.size(); ++o) {
    auto src = all.row(outputs_[o]);
    std::copy(src.begin(), src.end(), result.row(o).begin());
  }
  return result;
}

namespace {

PatternBlock with_key_rows(const PatternBlock& inputs, std::size_t extra_rows, const KeyVector* key) {
  PatternBlock full(inputs.rows() + extra_rows, inputs.words());
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    auto src = inputs.row(r);
    std::copy(src.begin(), src.end(), full.row(r).begin());
  }
  if (key) {
    for (std::size_t i = 0; i < key->width(); ++i) {
      auto row = full.row(inputs.rows() + i);
      std::fill(row.begin(), row.end(), (*key)[i] ? ~std::uint64_t{0} : 0);
    }
  }
  return full;
}

void require_key(const Netlist& n, const std::optional<KeyVector>& key) {
  if (n.is_locked() != key.has_value()) {
    throw Error(n.is_locked() ? "netlist '" + n.name() + "' is locked but no key was supplied"
                              : "netlist '" + n.name() + "' has no key inputs but a key was supplied");
  }
  if (key && key->width() != n.key_inputs().size()) {
    throw Error("key has " + std::to_string(key->width()) + " bits, netlist expects " +
                std::to_string(n.key_inputs().size()));
  }
}

}  // namespace

PatternBlock evaluate(const Netlist& n, const PatternBlock& inputs, const std::optional<KeyVector>& key) {
  require_key(n, key);
  if (inputs.rows() != n.primary_inputs().size()) {
    throw Error("missing input assignment: expected " + std::to_string(n.primary_inputs().size()) +
                " input rows, got " + std::to_string(inputs.rows()));
  }
  return Simulator(n).run(with_key_rows(inputs, n.key_inputs().size(), key ? &*key : nullptr));
}

std::vector<bool> evaluate_pattern(const Netlist& n, const std::vector<bool>& inputs,
                                   const std::optional<KeyVector>& key) {
  PatternBlock block(inputs.size(), 1);
  for (std::size_t i = 0; i < inputs.size(); ++i) block.set_bit(i, 0, inputs[i]);
  auto out = evaluate(n, block, key);
  std::vector<bool> bits(out.rows());
  for (std::size_t o = 0; o < out.rows(); ++o) bits[o] = out.bit(o, 0);
  return bits;
}

PatternBlock exhaustive_patterns(std::size_t inputs) {
  if (inputs > 24) throw Error("exhaustive simulation limited to 24 inputs");
  const std::size_t count = std::size_t{1} << inputs;
  PatternBlock block(inputs, (count + 63) / 64);
  for (std::size_t p = 0; p < block.patterns(); ++p) {
    const std::size_t value = p < count ? p : 0;
    for (std::size_t i = 0; i < inputs; ++i) block.set_bit(i, p, (value >> i) & 1U);
  }
  return block;
}

PatternBlock random_patterns(std::size_t inputs, std::size_t count, std::mt19937_64& rng) {
  PatternBlock block(inputs, std::max<std::size_t>(1, (count + 63) / 64));
  for (std::size_t r = 0; r < inputs; ++r)
    for (auto& w : block.row(r)) w = rng();
  return block;
}

PatternBlock input_patterns(std::size_t inputs, std::size_t random_count, std::uint64_t seed, bool* exhaustive) {
  const bool exh = inputs <= kExhaustiveInputLimit;
  if (exhaustive) *exhaustive = exh;
  if (exh) return exhaustive_patterns(inputs);
  std::mt19937_64 rng(seed);
  return random_patterns(inputs, random_count, rng);
}

std::size_t pattern_count(std::size_t inputs, const PatternBlock& block, bool exhaustive) {
  return exhaustive ? (std::size_t{1} << inputs) : block.patterns();
}

std::vector<std::size_t> input_permutation(const Netlist& from, const Netlist& to) {
  const auto& a = from.primary_inputs();
  const auto& b = to.primary_inputs();
  if (a.size() != b.size()) {
    throw Error("input interface mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                " primary inputs");
  }
  std::unordered_map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < a.size(); ++i) pos.emplace(a[i], i);
  std::vector<std::size_t> perm(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    auto it = pos.find(b[i]);
    if (it == pos.end()) throw Error("input interface mismatch: '" + b[i] + "' missing from '" + from.name() + "'");
    perm[i] = it->second;
  }
  return perm;
}

namespace {

PatternBlock permute_rows(const PatternBlock& in, const std::vector<std::size_t>& perm) {
  PatternBlock out(perm.size(), in.words());
  for (std::size_t r = 0; r < perm.size(); ++r) {
    auto src = in.row(perm[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// Mask selecting the meaningful lanes of word `w`.
std::uint64_t lane_mask(std::size_t w, std::size_t valid) {
  const std::size_t first = w * 64;
  if (valid >= first + 64) return ~std::uint64_t{0};
  if (valid <= first) return 0;
  return (std::uint64_t{1} << (valid - first)) - 1;
}

void require_outputs(const Netlist& a, const Netlist& b) {
  if (a.primary_outputs().size() != b.primary_outputs().size()) {
    throw Error("output interface mismatch: " + std::to_string(a.primary_outputs().size()) + " vs " +
                std::to_string(b.primary_outputs().size()) + " primary outputs");
  }
}

}  // namespace

KeyCheck check_key(const Netlist& original, const Netlist& locked, const KeyVector& key, std::size_t patterns,
                   std::uint64_t seed) {
  if (original.is_locked()) throw Error("check_key: original netlist must be key-free");
  const auto perm = input_permutation(original, locked);
  require_outputs(original, locked);
  KeyCheck r;
  auto block = input_patterns(original.primary_inputs().size(), patterns, seed, &r.exhaustive);
  const std::size_t valid = pattern_count(original.primary_inputs().size(), block, r.exhaustive);
  const auto ref = evaluate(original, block);
  const auto got = evaluate(locked, permute_rows(block, perm),
                            locked.is_locked() ? std::optional<KeyVector>(key) : std::nullopt);
  for (std::size_t w = 0; w < block.words(); ++w) {
    std::uint64_t diff = 0;
    for (std::size_t o = 0; o < ref.rows(); ++o) diff |= ref.row(o)[w] ^ got.row(o)[w];
    r.mismatches += static_cast<std::uint64_t>(std::popcount(diff & lane_mask(w, valid)));
  }
  r.patterns = valid;
  r.match = r.mismatches == 0;
  return r;
}

KeyCheck check_correct_key(const Netlist& original, const Netlist& locked, std::size_t patterns, std::uint64_t seed) {
  if (locked.is_locked() && !locked.correct_key()) throw Error("locked netlist carries no correct key");
  return check_key(original, locked, locked.correct_key().value_or(KeyVector{}), patterns, seed);
}

CorruptionEstimate measure_corruption(const Netlist& original, const Netlist& locked, const CorruptionOptions& opt) {
  if (!locked.correct_key() || locked.key_inputs().empty()) throw Error("measure_corruption: key width 0");
  if (opt.keys == 0 || opt.inputs == 0) throw Error("measure_corruption: sample counts must be positive");
  const auto perm = input_permutation(original, locked);
  require_outputs(original, locked);

  std::mt19937_64 rng(opt.seed);
  const std::size_t n_in = original.primary_inputs().size();
  bool exhaustive = n_in <= kExhaustiveInputLimit;
  PatternBlock block = exhaustive ? exhaustive_patterns(n_in) : random_patterns(n_in, opt.inputs, rng);
  const std::size_t valid = pattern_count(n_in, block, exhaustive);
  const auto ref = evaluate(original, block);
  const auto locked_inputs = permute_rows(block, perm);
  const Simulator sim(locked);

  const KeyVector& correct = *locked.correct_key();
  const std::size_t width = correct.width();
  std::uint64_t bit_errors = 0;
  std::uint64_t pattern_errors = 0;
  for (std::size_t k = 0; k < opt.keys; ++k) {
    KeyVector key;
    do {
      std::vector<bool> bits(width);
      std::uint64_t word = 0;
      for (std::size_t i = 0; i < width; ++i) {
        if (i % 64 == 0) word = rng();
        bits[i] = (word >> (i % 64)) & 1U;
      }
      key = KeyVector(std::move(bits));
    } while (key == correct);
    const auto got = sim.run(with_key_rows(locked_inputs, width, &key));
    for (std::size_t w = 0; w < block.words(); ++w) {
      const auto mask = lane_mask(w, valid);
      std::uint64_t any = 0;
      for (std::size_t o = 0; o < ref.rows(); ++o) {
        const auto d = (ref.row(o)[w] ^ got.row(o)[w]) & mask;
        bit_errors += static_cast<std::uint64_t>(std::popcount(d));
        any |= d;
      }
      pattern_errors += static_cast<std::uint64_t>(std::popcount(any));
    }
  }
  CorruptionEstimate est;
  est.samples_inputs = valid;
  est.samples_keys = opt.keys;
  est.seed = opt.seed;
  const double samples = static_cast<double>(valid) * static_cast<double>(opt.keys);
  const double outs = static_cast<double>(std::max<std::size_t>(1, ref.rows()));
  est.bit_error_rate = static_cast<double>(bit_errors) / (samples * outs);
  est.pattern_error_rate = static_cast<double>(pattern_errors) / samples;
  return est;
}

nlohmann::json to_json(const KeyCheck& c) {
  return {{"match", c.match}, {"mismatches", c.mismatches}, {"patterns", c.patterns}, {"exhaustive", c.exhaustive}};
}

nlohmann::json to_json(const CorruptionEstimate& c) {
  return {{"bit_error_rate", c.bit_error_rate},
          {"pattern_error_rate", c.pattern_error_rate},
          {"samples_inputs", c.samples_inputs},
          {"samples_keys", c.samples_keys},
          {"seed", c.seed}};
}

}  // namespace netlock
