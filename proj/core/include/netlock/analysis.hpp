// Structural features and topology-aware ranking of candidate lock sites.

#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netlock/netlist.hpp"

namespace netlock {

struct NodeFeatures {
  std::string node;
  int depth = 0;                 // longest input-to-node path, in gates
  std::size_t fanout = 0;        // distinct sink gates
  std::size_t tfo_size = 0;      // gates in the transitive fanout
  double cone_coverage = 0.0;    // fraction of primary outputs reachable
  double observability = 0.0;    // 1 / (1 + gate distance to nearest output)
};

using FeatureMap = std::map<std::string, NodeFeatures>;

/// One record per gate output. Nodes with no path to any output get
/// observability 1 / (1 + gate_count), smaller than any observable node.
FeatureMap compute_features(const Netlist& netlist);

struct CircuitStats {
  std::size_t gates = 0;
  int max_depth = 0;
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::size_t key_inputs = 0;
};

CircuitStats circuit_stats(const Netlist& netlist);

struct RankedSite {
  std::string node;
  double score = 0.0;
};

struct RankedSites {
  std::vector<RankedSite> entries;  // score descending, node id ascending on ties
  CircuitStats circuit_stats;

  /// Position of `node` in the ranking, or entries.size() when absent.
  std::size_t position(const std::string& node) const;
};

struct RankWeights {
  double tfo = 0.35;
  double depth = 0.25;
  double cone = 0.20;
  double observability = 0.20;
};

double site_score(const NodeFeatures& f, std::size_t gate_count, int max_depth, const RankWeights& w = {});

RankedSites rank_nodes(const Netlist& netlist, const FeatureMap& features, const RankWeights& w = {});

nlohmann::json to_json(const CircuitStats& stats);
nlohmann::json to_json(const NodeFeatures& f);
/// {circuit, stats, nodes:[{node, depth, fanout, tfo_size, cone_coverage, observability, score}]}
nlohmann::json analysis_report(const Netlist& netlist, const FeatureMap& features, const RankedSites& ranked);

/// Transitive fanout of `id` as a signal-indexed mask (excluding `id`).
std::vector<bool> transitive_fanout(const Netlist& netlist, SignalId id);

}  // namespace netlock
