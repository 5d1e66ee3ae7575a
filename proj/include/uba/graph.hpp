#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "uba/events.hpp"

namespace uba {

struct UnknownUserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VertexKind : std::uint8_t { user, device };

// Weighted undirected user-device graph. Edges exist only between a user and
// a device; the weight of an edge is the number of logoff events observed on
// that (user, pc) pair. Logon rows never create edges. The graph is frozen
// once built and safe for concurrent read-only access.
class BipartiteGraph {
 public:
  struct Neighbor {
    std::uint32_t index;   // device index from a user, user index from a device
    std::uint64_t weight;  // logoff count, always >= 1
  };

  struct Edge {
    std::uint32_t user;
    std::uint32_t device;
    std::uint64_t weight;
  };

  class Builder {
   public:
    // keep_isolated_users: users with zero logoff events stay in the graph as
    // isolated vertices, so downstream per-user artifacts keep one row per
    // roster user.
    explicit Builder(bool keep_isolated_users = true)
        : keep_isolated_(keep_isolated_users) {}

    void add_user(const UserId& user);  // registers a (possibly isolated) user
    void add(const LogonEvent& event);
    BipartiteGraph build() &&;

   private:
    std::uint32_t intern_user(const std::string& id);
    std::uint32_t intern_device(const std::string& id);

    bool keep_isolated_;
    std::vector<std::string> users_, devices_;
    std::unordered_map<std::string, std::uint32_t> user_index_, device_index_;
    std::unordered_map<std::uint64_t, std::uint64_t> edge_weight_;  // (u<<32|d)
    std::vector<bool> user_has_edge_;
  };

  std::size_t user_count() const { return users_.size(); }
  std::size_t device_count() const { return devices_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::uint64_t total_weight() const { return total_weight_; }

  const std::string& user_id(std::uint32_t u) const { return users_[u]; }
  const std::string& device_id(std::uint32_t d) const { return devices_[d]; }
  std::optional<std::uint32_t> find_user(const UserId& id) const;
  std::optional<std::uint32_t> find_device(const DeviceId& id) const;

  std::span<const Neighbor> user_neighbors(std::uint32_t u) const {
    return {user_adj_.data() + user_offsets_[u],
            user_offsets_[u + 1] - user_offsets_[u]};
  }
  std::span<const Neighbor> device_neighbors(std::uint32_t d) const {
    return {device_adj_.data() + device_offsets_[d],
            device_offsets_[d + 1] - device_offsets_[d]};
  }

  // Number of distinct devices a user has logged off from.
  std::size_t degree(std::uint32_t u) const { return user_neighbors(u).size(); }
  std::size_t degree(const UserId& id) const;  // throws UnknownUserError

  std::uint64_t weight(std::uint32_t u, std::uint32_t d) const;  // 0 if absent

  std::vector<Edge> edges() const;  // sorted by (user id, device id)
  void write_edge_list(std::ostream& out) const;

 private:
  friend class Builder;
  std::vector<std::string> users_, devices_;
  std::unordered_map<std::string, std::uint32_t> user_index_, device_index_;
  std::vector<std::size_t> user_offsets_, device_offsets_;
  std::vector<Neighbor> user_adj_, device_adj_;
  std::size_t edge_count_ = 0;
  std::uint64_t total_weight_ = 0;
};

// Builds the graph from a logon event stream. Every user named in `roster`
// (and, when keep_isolated_users is set, every user seen in any event row)
// gets a vertex; edges come from logoff rows only.
BipartiteGraph build_graph(const std::vector<LogonEvent>& events,
                           const std::vector<UserId>& roster_users = {},
                           bool keep_isolated_users = true);

struct DegreeHistogram {
  std::uint32_t bin_width = 1;
  std::vector<std::uint64_t> counts;  // counts[i] covers [i*w, (i+1)*w)

  std::uint64_t total() const;
};

DegreeHistogram degree_histogram(const BipartiteGraph& g, std::uint32_t bin_width);

void write_degree_histogram_csv(std::ostream& out, const DegreeHistogram& h);

}  // namespace uba
