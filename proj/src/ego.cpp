#include "uba/ego.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <unordered_map>

namespace uba {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HopDistances {
  std::vector<int> user_hops;    // -1 = unreached
  std::vector<int> device_hops;
};

// Unweighted BFS from the ego user, capped at max_hops.
HopDistances bfs_from(const BipartiteGraph& g, std::uint32_t ego, int max_hops) {
  HopDistances d;
  d.user_hops.assign(g.user_count(), -1);
  d.device_hops.assign(g.device_count(), -1);
  d.user_hops[ego] = 0;

  // Frontier alternates between user and device vertices.
  std::vector<std::uint32_t> frontier = {ego};
  bool frontier_is_users = true;
  for (int hop = 1; hop <= max_hops && !frontier.empty(); ++hop) {
    std::vector<std::uint32_t> next;
    if (frontier_is_users) {
      for (std::uint32_t u : frontier) {
        for (const auto& n : g.user_neighbors(u)) {
          if (d.device_hops[n.index] < 0) {
            d.device_hops[n.index] = hop;
            next.push_back(n.index);
          }
        }
      }
    } else {
      for (std::uint32_t dev : frontier) {
        for (const auto& n : g.device_neighbors(dev)) {
          if (d.user_hops[n.index] < 0) {
            d.user_hops[n.index] = hop;
            next.push_back(n.index);
          }
        }
      }
    }
    frontier = std::move(next);
    frontier_is_users = !frontier_is_users;
  }
  return d;
}

EgoSubgraph collect(const BipartiteGraph& g, std::uint32_t ego, int order,
                    const HopDistances& d) {
  EgoSubgraph sg;
  sg.ego = ego;
  sg.order = order;
  sg.users.push_back(ego);
  sg.user_hops.push_back(0);
  for (std::uint32_t u = 0; u < g.user_count(); ++u) {
    if (u != ego && d.user_hops[u] >= 0 && d.user_hops[u] <= order) {
      sg.users.push_back(u);
      sg.user_hops.push_back(d.user_hops[u]);
    }
  }
  for (std::uint32_t dev = 0; dev < g.device_count(); ++dev) {
    if (d.device_hops[dev] >= 0 && d.device_hops[dev] <= order) {
      sg.devices.push_back(dev);
      sg.device_hops.push_back(d.device_hops[dev]);
    }
  }
  return sg;
}

EgoMetrics compute_metrics(const BipartiteGraph& g,
                           const std::vector<std::uint32_t>& users,
                           const std::vector<std::uint32_t>& devices,
                           EgoOptions opts) {
  const std::size_t nu = users.size();
  const std::size_t nd = devices.size();
  const std::size_t nv = nu + nd;

  EgoMetrics m;
  m.vertex_count = static_cast<double>(nv);
  m.peer_count = static_cast<double>(nu - 1);
  if (nv <= 1) return m;  // isolated ego: zero edges, density, diameter

  // Local indexing: users first, then devices.
  std::unordered_map<std::uint32_t, std::uint32_t> device_local;
  device_local.reserve(nd);
  for (std::uint32_t i = 0; i < nd; ++i) device_local.emplace(devices[i], nu + i);

  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(nv);
  std::size_t edge_count = 0;
  for (std::uint32_t i = 0; i < nu; ++i) {
    for (const auto& n : g.user_neighbors(users[i])) {
      auto it = device_local.find(n.index);
      if (it == device_local.end()) continue;
      double w = opts.distances == DistanceWeights::direct
                     ? static_cast<double>(n.weight)
                     : 1.0 / static_cast<double>(n.weight);
      adj[i].push_back({it->second, w});
      adj[it->second].push_back({i, w});
      ++edge_count;
    }
  }
  m.edge_count = static_cast<double>(edge_count);

  double denom;
  if (opts.density == DensityDenominator::simple) {
    denom = static_cast<double>(nv) * (static_cast<double>(nv) - 1.0) / 2.0;
  } else {
    denom = static_cast<double>(nu) * static_cast<double>(nd);
  }
  m.density = denom > 0 ? m.edge_count / denom : 0.0;

  // Weighted diameter: max over vertex pairs of the shortest-path length
  // inside the induced subgraph. Ego expansion always yields a connected
  // subgraph; anything else is a graph-core bug.
  double diameter = 0;
  std::vector<double> dist(nv);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (std::uint32_t src = 0; src < nv; ++src) {
    std::fill(dist.begin(), dist.end(), kInf);
    dist[src] = 0;
    heap.push({0, src});
    while (!heap.empty()) {
      auto [du, v] = heap.top();
      heap.pop();
      if (du > dist[v]) continue;
      for (const auto& [w, len] : adj[v]) {
        double alt = du + len;
        if (alt < dist[w]) {
          dist[w] = alt;
          heap.push({alt, w});
        }
      }
    }
    for (double dv : dist) {
      if (dv == kInf) {
        throw std::logic_error("ego subgraph is disconnected");
      }
      diameter = std::max(diameter, dv);
    }
  }
  m.weighted_diameter = diameter;
  return m;
}

}  // namespace

EgoSubgraph ego_subgraph(const BipartiteGraph& g, std::uint32_t ego_user,
                         int order) {
  if (ego_user >= g.user_count()) {
    throw UnknownUserError("user index out of range");
  }
  if (order < 1 || order > kMaxSubgraphOrder) {
    throw std::invalid_argument("subgraph order must be in [1,5]");
  }
  HopDistances d = bfs_from(g, ego_user, order);
  return collect(g, ego_user, order, d);
}

EgoSubgraph ego_subgraph(const BipartiteGraph& g, const UserId& ego, int order) {
  auto u = g.find_user(ego);
  if (!u) throw UnknownUserError("unknown user vertex: " + ego);
  return ego_subgraph(g, *u, order);
}

EgoMetrics metrics(const BipartiteGraph& g, const EgoSubgraph& sg,
                   EgoOptions opts) {
  return compute_metrics(g, sg.users, sg.devices, opts);
}

std::array<double, kSubgraphBlockWidth> subgraph_feature_block(
    const BipartiteGraph& g, std::uint32_t ego_user, EgoOptions opts) {
  if (ego_user >= g.user_count()) {
    throw UnknownUserError("user index out of range");
  }
  HopDistances d = bfs_from(g, ego_user, kMaxSubgraphOrder);

  std::array<double, kSubgraphBlockWidth> block{};
  EgoMetrics prev{};
  std::size_t prev_vertices = 0;
  for (int order = 1; order <= kMaxSubgraphOrder; ++order) {
    std::vector<std::uint32_t> users = {ego_user};
    std::vector<std::uint32_t> devices;
    for (std::uint32_t u = 0; u < g.user_count(); ++u) {
      if (u != ego_user && d.user_hops[u] >= 0 && d.user_hops[u] <= order) {
        users.push_back(u);
      }
    }
    for (std::uint32_t dev = 0; dev < g.device_count(); ++dev) {
      if (d.device_hops[dev] >= 0 && d.device_hops[dev] <= order) {
        devices.push_back(dev);
      }
    }
    EgoMetrics m;
    std::size_t nv = users.size() + devices.size();
    if (order > 1 && nv == prev_vertices) {
      m = prev;  // the neighborhood stabilized; metrics are unchanged
    } else {
      m = compute_metrics(g, users, devices, opts);
    }
    auto values = m.as_array();
    std::copy(values.begin(), values.end(),
              block.begin() + (order - 1) * kMetricsPerOrder);
    prev = m;
    prev_vertices = nv;
  }
  return block;
}

const std::vector<std::string>& subgraph_block_column_names() {
  static const std::vector<std::string> names = [] {
    static constexpr const char* metric_names[] = {
        "vertex_count", "edge_count", "density", "weighted_diameter",
        "peer_count"};
    std::vector<std::string> out;
    for (int order = 1; order <= kMaxSubgraphOrder; ++order) {
      for (const char* metric : metric_names) {
        out.push_back("o" + std::to_string(order) + "_" + metric);
      }
    }
    return out;
  }();
  return names;
}

}  // namespace uba
