#include "netlock/analysis.hpp"

#include <algorithm>
#include <bit>
#include <limits>

namespace netlock {

namespace {

class BitRows {
 public:
  BitRows(std::size_t rows, std::size_t bits) : words_((bits + 63) / 64), data_(rows * words_, 0) {}
  std::uint64_t* row(std::size_t r) { return data_.data() + r * words_; }
  const std::uint64_t* row(std::size_t r) const { return data_.data() + r * words_; }
  void set(std::size_t r, std::size_t bit) { row(r)[bit / 64] |= std::uint64_t{1} << (bit % 64); }
  void merge(std::size_t dst, std::size_t src) {
    auto* d = row(dst);
    const auto* s = row(src);
    for (std::size_t i = 0; i < words_; ++i) d[i] |= s[i];
  }
  std::size_t count(std::size_t r) const {
    std::size_t c = 0;
    const auto* p = row(r);
    for (std::size_t i = 0; i < words_; ++i) c += static_cast<std::size_t>(std::popcount(p[i]));
    return c;
  }

 private:
  std::size_t words_;
  std::vector<std::uint64_t> data_;
};

}  // namespace

FeatureMap compute_features(const Netlist& n) {
  const std::size_t G = n.gate_count();
  const std::size_t base = n.input_count();
  const std::size_t n_out = n.primary_outputs().size();

  std::vector<int> depth(n.signal_count(), 0);
  for (std::size_t g = 0; g < G; ++g) {
    int d = 0;
    for (auto s : n.gate_fanin(g)) d = std::max(d, depth[s]);
    depth[base + g] = d + 1;
  }

  // Reverse topological sweep: gate-level TFO and reachable-output sets.
  BitRows tfo(G, G);
  BitRows cone(G, n_out);
  std::vector<std::size_t> out_pos(n.signal_count(), std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n_out; ++i) out_pos[n.output_ids()[i]] = i;
  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(G, kFar);

  for (std::size_t g = G; g-- > 0;) {
    const SignalId s = n.gate_output(g);
    if (out_pos[s] != std::numeric_limits<std::size_t>::max()) {
      cone.set(g, out_pos[s]);
      dist[g] = 0;
    }
    for (auto sink : n.sinks(s)) {
      tfo.set(g, sink);
      tfo.merge(g, sink);
      cone.merge(g, sink);
      if (dist[sink] != kFar) dist[g] = std::min(dist[g], dist[sink] + 1);
    }
  }

  FeatureMap out;
  for (std::size_t g = 0; g < G; ++g) {
    const SignalId s = n.gate_output(g);
    NodeFeatures f;
    f.node = n.signal_name(s);
    f.depth = depth[s];
    f.fanout = n.sinks(s).size();
    f.tfo_size = tfo.count(g);
    f.cone_coverage = n_out == 0 ? 0.0 : static_cast<double>(cone.count(g)) / static_cast<double>(n_out);
    const double d = dist[g] == kFar ? static_cast<double>(G) : static_cast<double>(dist[g]);
    f.observability = 1.0 / (1.0 + d);
    out.emplace(f.node, std::move(f));
  }
  return out;
}

CircuitStats circuit_stats(const Netlist& n) {
  CircuitStats st;
  st.gates = n.gate_count();
  st.inputs = n.primary_inputs().size();
  st.outputs = n.primary_outputs().size();
  st.key_inputs = n.key_inputs().size();
  std::vector<int> depth(n.signal_count(), 0);
  for (std::size_t g = 0; g < n.gate_count(); ++g) {
    int d = 0;
    for (auto s : n.gate_fanin(g)) d = std::max(d, depth[s]);
    depth[n.gate_output(g)] = d + 1;
    st.max_depth = std::max(st.max_depth, d + 1);
  }
  return st;
}

double site_score(const NodeFeatures& f, std::size_t gate_count, int max_depth, const RankWeights& w) {
  const double tfo = gate_count == 0 ? 0.0 : static_cast<double>(f.tfo_size) / static_cast<double>(gate_count);
  const double depth = max_depth == 0 ? 0.0 : static_cast<double>(f.depth) / static_cast<double>(max_depth);
  double score = w.tfo * tfo + w.depth * depth + w.cone * f.cone_coverage + w.observability * f.observability;
  return std::clamp(score, 0.0, 1.0);
}

RankedSites rank_nodes(const Netlist& n, const FeatureMap& features, const RankWeights& w) {
  RankedSites r;
  r.circuit_stats = circuit_stats(n);
  r.entries.reserve(features.size());
  for (const auto& [node, f] : features) {
    r.entries.push_back({node, site_score(f, r.circuit_stats.gates, r.circuit_stats.max_depth, w)});
  }
  std::stable_sort(r.entries.begin(), r.entries.end(), [](const RankedSite& a, const RankedSite& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.node < b.node;
  });
  return r;
}

std::size_t RankedSites::position(const std::string& node) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].node == node) return i;
  return entries.size();
}

nlohmann::json to_json(const CircuitStats& st) {
  return {{"gates", st.gates},
          {"max_depth", st.max_depth},
          {"inputs", st.inputs},
          {"outputs", st.outputs},
          {"key_inputs", st.key_inputs}};
}

nlohmann::json to_json(const NodeFeatures& f) {
  return {{"node", f.node},
          {"depth", f.depth},
          {"fanout", f.fanout},
          {"tfo_size", f.tfo_size},
          {"cone_coverage", f.cone_coverage},
          {"observability", f.observability}};
}

nlohmann::json analysis_report(const Netlist& n, const FeatureMap& features, const RankedSites& ranked) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& e : ranked.entries) {
    auto j = to_json(features.at(e.node));
    j["score"] = e.score;
    nodes.push_back(std::move(j));
  }
  return {{"circuit", n.name()}, {"stats", to_json(ranked.circuit_stats)}, {"nodes", std::move(nodes)}};
}

std::vector<bool> transitive_fanout(const Netlist& n, SignalId id) {
  std::vector<bool> seen(n.signal_count(), false);
  std::vector<SignalId> stack{id};
  while (!stack.empty()) {
    SignalId s = stack.back();
    stack.pop_back();
    for (auto g : n.sinks(s)) {
      SignalId o = n.gate_output(g);
      if (!seen[o]) {
        seen[o] = true;
        stack.push_back(o);
      }
    }
  }
  return seen;
}

}  // namespace netlock
