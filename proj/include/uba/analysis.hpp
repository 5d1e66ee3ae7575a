#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "uba/features.hpp"
#include "uba/iforest.hpp"

namespace uba {

// The scoring inventory: one run per feature group, one over all 50 columns,
// and one per subgraph order (reporting only). 12 runs in total.
enum class ScoreRunId : std::uint8_t {
  graph = 0,
  subgraph,
  logon_logoff,
  removable_media,
  web,
  psychometric,
  combined,
  subgraph_o1,
  subgraph_o2,
  subgraph_o3,
  subgraph_o4,
  subgraph_o5,
};
inline constexpr int kScoreRunCount = 12;
const char* to_string(ScoreRunId id);

struct AnalysisOptions {
  ForestConfig forest;               // forest.seed is the master seed
  double uninformative_band = 0.05;  // every score within 0.5 +/- band => excluded
  double threshold_margin = 0.1;     // threshold = max score - margin
};

struct ScoreRun {
  ScoreRunId id{};
  std::string name;
  std::vector<double> scores;  // one per cohort user, cohort order
  bool informative = false;
  std::size_t column_begin = 0, column_end = 0;
};

struct ScoreSet {
  std::vector<ScoreRun> runs;  // fixed ScoreRunId order

  const ScoreRun& run(ScoreRunId id) const {
    return runs[static_cast<std::size_t>(id)];
  }
};

// Runs the isolation forest independently per run, each seeded with
// SplitMix64::mix(master_seed, run_id).
ScoreSet score_groups(const FeatureMatrix& m, const AnalysisOptions& opts);

// Rebuilds a ScoreSet (with informative flags) from stored score vectors, in
// ScoreRunId order. Used when the report stage starts from scores.csv.
ScoreSet score_set_from_vectors(const std::vector<std::vector<double>>& scores,
                                const AnalysisOptions& opts);

// max - margin. Throws std::logic_error when the run is uninformative.
double group_threshold(const ScoreRun& run, double margin);

// Binary suspicion flags over the informative groups among the six
// Table-style parameter groups. The combined and per-order runs never flag.
struct FlagMatrix {
  std::vector<ScoreRunId> groups;   // informative groups, ScoreRunId order
  std::vector<double> thresholds;   // parallel to groups
  std::vector<std::vector<std::uint8_t>> flags;  // [user][group]

  int flag_count(std::size_t user) const {
    int k = 0;
    for (auto f : flags[user]) k += f;
    return k;
  }
};

FlagMatrix build_flag_matrix(const ScoreSet& scores, const AnalysisOptions& opts);

// Percentage of users whose flag count equals k, k = 0..6.
struct DependencyTable {
  std::array<std::uint32_t, 7> count{};
  std::array<double, 7> percent{};
};

DependencyTable case1_dependency(const FlagMatrix& fm);

// Percentage of users flagged on every group of each non-empty subset of the
// informative groups.
struct SubsetRate {
  std::vector<ScoreRunId> groups;
  std::uint32_t count = 0;
  double percent = 0;
};

std::vector<SubsetRate> case2_combinations(const FlagMatrix& fm);

struct ScoreHistogram {
  std::string run;
  double bin_width = 0.05;
  std::vector<std::uint64_t> counts;  // bin i covers [i*w, (i+1)*w) over [0,1]
};

ScoreHistogram score_histogram(const ScoreRun& run, double bin_width = 0.05);

struct AnomalyReport {
  std::vector<UserId> users;
  ScoreSet scores;
  FlagMatrix flags;
  DependencyTable case1;
  std::vector<SubsetRate> case2;
  std::vector<ScoreHistogram> histograms;    // one per run
  std::vector<std::uint32_t> combined_rank;  // per user; 1 = highest combined
  std::uint64_t seed = 0;
};

AnomalyReport build_report(const std::vector<UserId>& users, ScoreSet scores,
                           const AnalysisOptions& opts);

nlohmann::ordered_json report_to_json(const AnomalyReport& report);

void write_scores_csv(std::ostream& out, const std::vector<UserId>& users,
                      const ScoreSet& scores);
void write_flags_csv(std::ostream& out, const AnomalyReport& report);
void write_case1_csv(std::ostream& out, const DependencyTable& table);
void write_case2_csv(std::ostream& out, const std::vector<SubsetRate>& rates);
void write_score_histograms_csv(std::ostream& out, const AnomalyReport& report);

}  // namespace uba
