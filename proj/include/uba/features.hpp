#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "uba/ego.hpp"
#include "uba/events.hpp"
#include "uba/graph.hpp"
#include "uba/ingest.hpp"

namespace uba {

inline constexpr int kFeatureCount = 50;

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// min/max/mean over exact minutes-of-day; mode over whole-minute buckets
// (seconds dropped), ties resolved to the earliest minute.
struct TimeSummary {
  double min = 0;
  double max = 0;
  double mean = 0;
  double mode = 0;

  std::array<double, 4> as_array() const { return {min, max, mean, mode}; }
};

// nullopt when the list is empty; the caller decides how to impute.
std::optional<TimeSummary> summarize_times(std::span<const double> minutes);

enum class FeatureGroupId : std::uint8_t {
  graph,
  subgraph,
  logon_logoff,
  removable_media,
  web,
  psychometric,
};
inline constexpr int kFeatureGroupCount = 6;
const char* to_string(FeatureGroupId id);

struct FeatureGroup {
  FeatureGroupId id;
  std::string name;
  std::size_t begin;  // first column (inclusive)
  std::size_t end;    // last column (exclusive)

  std::size_t width() const { return end - begin; }
};

// The six groups partition columns 0..49 with widths 1/25/8/10/1/5.
const std::vector<FeatureGroup>& feature_groups();
const std::vector<std::string>& feature_column_names();

// Column span of one subgraph order inside the full 50-column layout.
std::pair<std::size_t, std::size_t> subgraph_order_columns(int order);

struct FeatureMatrix {
  std::vector<UserId> users;   // sorted by id; defines row order
  std::vector<double> values;  // row-major, users.size() x kFeatureCount

  std::size_t size() const { return users.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * kFeatureCount, kFeatureCount};
  }
  double at(std::size_t row_idx, std::size_t col) const {
    return values[row_idx * kFeatureCount + col];
  }
};

enum class ImputePolicy : std::uint8_t {
  cohort_mean,  // time-like features take the cohort mean of users with data
  zero,         // everything missing becomes 0
};

struct FeatureOptions {
  EgoOptions ego;
  ImputePolicy impute = ImputePolicy::cohort_mean;
  bool strict_psychometric = false;  // missing record is fatal when set
};

// Accumulates per-user raw behavior, then assembles the 50-column matrix.
// Events for users outside the cohort are ignored (they are expected to have
// been filtered out upstream). Feature computation per user is independent;
// assembly is a deterministic merge in cohort id order.
class FeatureBuilder {
 public:
  explicit FeatureBuilder(std::vector<UserId> cohort);

  void add(const LogonEvent& e);
  void add(const DeviceEvent& e);
  void add(const FileEvent& e);
  void add(const HttpEvent& e);
  void set_psychometrics(const PsychometricTable& table);

  // Requires the graph to contain every cohort user as a vertex.
  FeatureMatrix assemble(const BipartiteGraph& g, FeatureOptions opts = {}) const;

  const std::vector<UserId>& cohort() const { return cohort_; }

 private:
  struct UserActivity {
    std::vector<double> logon_minutes, logoff_minutes;
    std::vector<double> insert_minutes, remove_minutes;
    std::unordered_map<std::int64_t, std::uint32_t> daily_file_copies;
    std::unordered_set<std::uint64_t> url_hashes;  // 64-bit FNV of exact urls
    const PsychometricRecord* psychometric = nullptr;
  };

  int user_slot(const UserId& user) const;  // -1 when not in cohort

  std::vector<UserId> cohort_;
  std::unordered_map<std::string, std::size_t> slot_;
  std::vector<UserActivity> activity_;
};

// Exact-round-trip CSV: header of canonical column names with a leading
// user_id column; doubles serialized with full precision. This file is the
// contract between feature extraction and scoring.
void write_feature_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(std::istream& in);

// Histogram export of the 25 subgraph metrics (one row per metric, order and
// bin), for external plotting.
void write_subgraph_metric_histograms_csv(std::ostream& out,
                                          const FeatureMatrix& m,
                                          int bins = 20);

std::uint64_t fnv1a64(std::string_view text);

}  // namespace uba
