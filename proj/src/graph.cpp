#include "uba/graph.hpp"

#include <algorithm>

#include "uba/csv.hpp"

namespace uba {

std::uint32_t BipartiteGraph::Builder::intern_user(const std::string& id) {
  auto [it, inserted] = user_index_.try_emplace(id, users_.size());
  if (inserted) {
    users_.push_back(id);
    user_has_edge_.push_back(false);
  }
  return it->second;
}

std::uint32_t BipartiteGraph::Builder::intern_device(const std::string& id) {
  auto [it, inserted] = device_index_.try_emplace(id, devices_.size());
  if (inserted) devices_.push_back(id);
  return it->second;
}

void BipartiteGraph::Builder::add_user(const UserId& user) {
  intern_user(user);
}

void BipartiteGraph::Builder::add(const LogonEvent& event) {
  std::uint32_t u = intern_user(event.user);
  if (event.activity != LogonActivity::logoff) return;
  std::uint32_t d = intern_device(event.pc);
  std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | d;
  ++edge_weight_[key];
  user_has_edge_[u] = true;
}

BipartiteGraph BipartiteGraph::Builder::build() && {
  BipartiteGraph g;

  // Vertex order is the sorted id order so rebuilding from the same stream,
  // in any event order, produces an identical graph.
  std::vector<std::uint32_t> user_map(users_.size());
  {
    std::vector<std::uint32_t> order;
    for (std::uint32_t i = 0; i < users_.size(); ++i) {
      if (keep_isolated_ || user_has_edge_[i]) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return users_[a] < users_[b];
    });
    for (std::uint32_t pos = 0; pos < order.size(); ++pos) {
      user_map[order[pos]] = pos;
      g.users_.push_back(users_[order[pos]]);
      g.user_index_.emplace(users_[order[pos]], pos);
    }
    // Dropped isolated users keep an out-of-range marker.
    for (std::uint32_t i = 0; i < users_.size(); ++i) {
      if (!keep_isolated_ && !user_has_edge_[i]) {
        user_map[i] = static_cast<std::uint32_t>(-1);
      }
    }
  }
  std::vector<std::uint32_t> device_map(devices_.size());
  {
    std::vector<std::uint32_t> order(devices_.size());
    for (std::uint32_t i = 0; i < devices_.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return devices_[a] < devices_[b];
    });
    for (std::uint32_t pos = 0; pos < order.size(); ++pos) {
      device_map[order[pos]] = pos;
      g.devices_.push_back(devices_[order[pos]]);
      g.device_index_.emplace(devices_[order[pos]], pos);
    }
  }

  std::vector<std::vector<Neighbor>> user_adj(g.users_.size());
  std::vector<std::vector<Neighbor>> device_adj(g.devices_.size());
  for (const auto& [key, w] : edge_weight_) {
    std::uint32_t u = user_map[static_cast<std::uint32_t>(key >> 32)];
    std::uint32_t d = device_map[static_cast<std::uint32_t>(key & 0xffffffffu)];
    user_adj[u].push_back({d, w});
    device_adj[d].push_back({u, w});
    ++g.edge_count_;
    g.total_weight_ += w;
  }

  auto flatten = [](std::vector<std::vector<Neighbor>>& adj,
                    std::vector<std::size_t>& offsets,
                    std::vector<Neighbor>& flat) {
    offsets.assign(adj.size() + 1, 0);
    for (std::size_t i = 0; i < adj.size(); ++i) {
      std::sort(adj[i].begin(), adj[i].end(),
                [](const Neighbor& a, const Neighbor& b) {
                  return a.index < b.index;
                });
      offsets[i + 1] = offsets[i] + adj[i].size();
    }
    flat.reserve(offsets.back());
    for (auto& list : adj) {
      flat.insert(flat.end(), list.begin(), list.end());
    }
  };
  flatten(user_adj, g.user_offsets_, g.user_adj_);
  flatten(device_adj, g.device_offsets_, g.device_adj_);
  return g;
}

std::optional<std::uint32_t> BipartiteGraph::find_user(const UserId& id) const {
  auto it = user_index_.find(id);
  if (it == user_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> BipartiteGraph::find_device(const DeviceId& id) const {
  auto it = device_index_.find(id);
  if (it == device_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t BipartiteGraph::degree(const UserId& id) const {
  auto u = find_user(id);
  if (!u) throw UnknownUserError("unknown user vertex: " + id);
  return degree(*u);
}

std::uint64_t BipartiteGraph::weight(std::uint32_t u, std::uint32_t d) const {
  for (const Neighbor& n : user_neighbors(u)) {
    if (n.index == d) return n.weight;
  }
  return 0;
}

std::vector<BipartiteGraph::Edge> BipartiteGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::uint32_t u = 0; u < users_.size(); ++u) {
    for (const Neighbor& n : user_neighbors(u)) {
      out.push_back({u, n.index, n.weight});
    }
  }
  return out;  // vertex ids are already in sorted order
}

void BipartiteGraph::write_edge_list(std::ostream& out) const {
  out << "user,device,weight\n";
  for (const Edge& e : edges()) {
    std::vector<std::string> row = {users_[e.user], devices_[e.device],
                                    std::to_string(e.weight)};
    write_csv_row(out, row);
  }
}

BipartiteGraph build_graph(const std::vector<LogonEvent>& events,
                           const std::vector<UserId>& roster_users,
                           bool keep_isolated_users) {
  BipartiteGraph::Builder builder(keep_isolated_users);
  for (const auto& user : roster_users) builder.add_user(user);
  for (const auto& event : events) builder.add(event);
  return std::move(builder).build();
}

std::uint64_t DegreeHistogram::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

DegreeHistogram degree_histogram(const BipartiteGraph& g, std::uint32_t bin_width) {
  DegreeHistogram h;
  h.bin_width = bin_width == 0 ? 1 : bin_width;
  for (std::uint32_t u = 0; u < g.user_count(); ++u) {
    std::size_t bin = g.degree(u) / h.bin_width;
    if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }
  return h;
}

void write_degree_histogram_csv(std::ostream& out, const DegreeHistogram& h) {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << i * h.bin_width << ',' << (i + 1) * h.bin_width << ','
        << h.counts[i] << '\n';
  }
}

}  // namespace uba
