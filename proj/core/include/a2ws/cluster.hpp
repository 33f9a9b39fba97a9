#pragma once

#include <cmath>
#include <string>
#include <vector>

// Simulated heterogeneous cluster: one rank per node, node speed derived
// from its core count through an imperfect-scaling exponent.

namespace a2ws {

struct NodeSpec {
  int cores = 1;
  double alpha = 0.9;  // speed = cores^alpha
  std::string label;

  double speed() const { return std::pow(static_cast<double>(cores), alpha); }
};

struct ClusterConfig {
  std::string name;
  std::vector<NodeSpec> nodes;

  int ranks() const { return static_cast<int>(nodes.size()); }
};

// The built-in C1..C5 node mixes, fastest nodes first (rank 0 hosts the
// leader-workers dispatcher; the trailing ranks are the 1-core stragglers).
ClusterConfig builtin_config(const std::string& name);

// Plain-text format: one node per line, `cores=<int> [alpha=<float>]`.
// '#' starts a comment.
ClusterConfig load_cluster_file(const std::string& path);

// Overrides the per-node alpha of an existing config.
void apply_alpha(ClusterConfig& config, double alpha);

}  // namespace a2ws
