#include "a2ws/cluster.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace a2ws {

namespace {

// Count of nodes per core size, C1..C5 columns.
struct MixRow {
  int cores;
  int count[5];
};

constexpr MixRow kMix[] = {
    {24, {2, 4, 8, 16, 32}},
    {16, {1, 2, 4, 8, 16}},
    {8, {1, 2, 4, 8, 16}},
    {4, {1, 2, 4, 8, 16}},
    {2, {1, 2, 4, 8, 16}},
    {1, {2, 4, 8, 16, 32}},
};

}  // namespace

ClusterConfig builtin_config(const std::string& name) {
  if (name.size() != 2 || name[0] != 'C' || name[1] < '1' || name[1] > '5')
    throw std::invalid_argument("unknown cluster config: " + name);
  int column = name[1] - '1';
  ClusterConfig config;
  config.name = name;
  for (const MixRow& row : kMix) {
    for (int i = 0; i < row.count[column]; ++i) {
      NodeSpec node;
      node.cores = row.cores;
      node.label = std::to_string(row.cores) + "c";
      config.nodes.push_back(node);
    }
  }
  return config;
}

ClusterConfig load_cluster_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cluster file: " + path);
  ClusterConfig config;
  config.name = path;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string field;
    NodeSpec node;
    bool has_cores = false;
    while (fields >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("bad cluster file field at line " +
                                 std::to_string(line_no) + ": " + field);
      std::string key = field.substr(0, eq);
      std::string value = field.substr(eq + 1);
      if (key == "cores") {
        node.cores = std::stoi(value);
        has_cores = true;
      } else if (key == "alpha") {
        node.alpha = std::stod(value);
      } else {
        throw std::runtime_error("unknown cluster file key: " + key);
      }
    }
    if (!has_cores) continue;  // blank or comment-only line
    if (node.cores < 1)
      throw std::runtime_error("cores must be >= 1 at line " +
                               std::to_string(line_no));
    node.label = std::to_string(node.cores) + "c";
    config.nodes.push_back(node);
  }
  if (config.nodes.size() < 2)
    throw std::runtime_error("cluster file needs at least two nodes");
  return config;
}

void apply_alpha(ClusterConfig& config, double alpha) {
  for (NodeSpec& node : config.nodes) node.alpha = alpha;
}

}  // namespace a2ws
