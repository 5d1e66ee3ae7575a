#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "uba/graph.hpp"

namespace uba {

inline constexpr int kMaxSubgraphOrder = 5;
inline constexpr int kMetricsPerOrder = 5;
inline constexpr int kSubgraphBlockWidth = kMaxSubgraphOrder * kMetricsPerOrder;

enum class DensityDenominator : std::uint8_t {
  simple,         // v(v-1)/2
  bipartite_max,  // n_users * n_devices
};

enum class DistanceWeights : std::uint8_t {
  direct,    // edge weight used as the distance
  inverted,  // 1/weight used as the distance
};

struct EgoOptions {
  DensityDenominator density = DensityDenominator::simple;
  DistanceWeights distances = DistanceWeights::direct;
};

// Induced subgraph on the closed <=order-hop neighborhood of one user. Hops
// are counted on unweighted edges; weights are inherited from the parent
// graph and only enter the diameter metric.
struct EgoSubgraph {
  std::uint32_t ego = 0;  // user index in the parent graph
  int order = 1;
  std::vector<std::uint32_t> users;     // parent user indices; ego is users[0]
  std::vector<std::uint32_t> devices;   // parent device indices
  std::vector<int> user_hops;           // parallel to users
  std::vector<int> device_hops;         // parallel to devices

  std::size_t vertex_count() const { return users.size() + devices.size(); }
};

struct EgoMetrics {
  double vertex_count = 0;
  double edge_count = 0;
  double density = 0;
  double weighted_diameter = 0;
  double peer_count = 0;

  std::array<double, kMetricsPerOrder> as_array() const {
    return {vertex_count, edge_count, density, weighted_diameter, peer_count};
  }
  bool operator==(const EgoMetrics&) const = default;
};

// Throws UnknownUserError for an unknown ego, std::invalid_argument for an
// order outside [1, kMaxSubgraphOrder].
EgoSubgraph ego_subgraph(const BipartiteGraph& g, std::uint32_t ego_user, int order);
EgoSubgraph ego_subgraph(const BipartiteGraph& g, const UserId& ego, int order);

EgoMetrics metrics(const BipartiteGraph& g, const EgoSubgraph& sg,
                   EgoOptions opts = {});

// The 25-value block for one user: orders 1..5, each contributing
// (vertex_count, edge_count, density, weighted_diameter, peer_count).
std::array<double, kSubgraphBlockWidth> subgraph_feature_block(
    const BipartiteGraph& g, std::uint32_t ego_user, EgoOptions opts = {});

// Column names "o{j}_{metric}" matching the block layout.
const std::vector<std::string>& subgraph_block_column_names();

}  // namespace uba
