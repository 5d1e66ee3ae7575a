#include "uba/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace uba {

namespace {

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool is_informative(const std::vector<double>& scores, double band) {
  for (double s : scores) {
    // The slack keeps scores exactly on the band edge inside it (0.45 and
    // 0.55 are not representable in binary).
    if (std::abs(s - 0.5) > band + 1e-12) return true;
  }
  return false;  // everything sits at ~0.5: no distinct anomalies
}

// Column span of each run inside the 50-column matrix.
std::pair<std::size_t, std::size_t> run_columns(ScoreRunId id) {
  switch (id) {
    case ScoreRunId::combined:
      return {0, static_cast<std::size_t>(kFeatureCount)};
    case ScoreRunId::subgraph_o1:
    case ScoreRunId::subgraph_o2:
    case ScoreRunId::subgraph_o3:
    case ScoreRunId::subgraph_o4:
    case ScoreRunId::subgraph_o5: {
      int order = static_cast<int>(id) - static_cast<int>(ScoreRunId::subgraph_o1) + 1;
      return subgraph_order_columns(order);
    }
    default: {
      const auto& group = feature_groups()[static_cast<std::size_t>(id)];
      return {group.begin, group.end};
    }
  }
}

}  // namespace

const char* to_string(ScoreRunId id) {
  switch (id) {
    case ScoreRunId::graph: return "graph";
    case ScoreRunId::subgraph: return "subgraph";
    case ScoreRunId::logon_logoff: return "logon_logoff";
    case ScoreRunId::removable_media: return "removable_media";
    case ScoreRunId::web: return "web";
    case ScoreRunId::psychometric: return "psychometric";
    case ScoreRunId::combined: return "combined";
    case ScoreRunId::subgraph_o1: return "subgraph_o1";
    case ScoreRunId::subgraph_o2: return "subgraph_o2";
    case ScoreRunId::subgraph_o3: return "subgraph_o3";
    case ScoreRunId::subgraph_o4: return "subgraph_o4";
    case ScoreRunId::subgraph_o5: return "subgraph_o5";
  }
  return "?";
}

ScoreSet score_groups(const FeatureMatrix& m, const AnalysisOptions& opts) {
  ScoreSet set;
  set.runs.reserve(kScoreRunCount);
  for (int r = 0; r < kScoreRunCount; ++r) {
    ScoreRunId id = static_cast<ScoreRunId>(r);
    auto [begin, end] = run_columns(id);

    DataMatrix data;
    data.cols = end - begin;
    data.values.reserve(m.size() * data.cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
      auto row = m.row(i);
      data.values.insert(data.values.end(), row.begin() + begin,
                         row.begin() + end);
    }

    ForestConfig cfg = opts.forest;
    cfg.seed = SplitMix64::mix(opts.forest.seed, static_cast<std::uint64_t>(r));
    IsolationForest forest = IsolationForest::fit(data, cfg);

    ScoreRun run;
    run.id = id;
    run.name = to_string(id);
    run.scores = forest.score_all(data);
    run.informative = is_informative(run.scores, opts.uninformative_band);
    run.column_begin = begin;
    run.column_end = end;
    set.runs.push_back(std::move(run));
  }
  return set;
}

ScoreSet score_set_from_vectors(const std::vector<std::vector<double>>& scores,
                                const AnalysisOptions& opts) {
  if (scores.size() != kScoreRunCount) {
    throw std::invalid_argument("expected 12 score vectors");
  }
  ScoreSet set;
  for (int r = 0; r < kScoreRunCount; ++r) {
    ScoreRunId id = static_cast<ScoreRunId>(r);
    ScoreRun run;
    run.id = id;
    run.name = to_string(id);
    run.scores = scores[r];
    run.informative = is_informative(run.scores, opts.uninformative_band);
    auto [begin, end] = run_columns(id);
    run.column_begin = begin;
    run.column_end = end;
    set.runs.push_back(std::move(run));
  }
  return set;
}

double group_threshold(const ScoreRun& run, double margin) {
  if (!run.informative) {
    throw std::logic_error("threshold requested for uninformative group '" +
                           run.name + "'");
  }
  double max_score = *std::max_element(run.scores.begin(), run.scores.end());
  return max_score - margin;
}

FlagMatrix build_flag_matrix(const ScoreSet& scores,
                             const AnalysisOptions& opts) {
  FlagMatrix fm;
  std::size_t users = 0;
  for (int g = 0; g < kFeatureGroupCount; ++g) {
    const ScoreRun& run = scores.runs[g];
    users = run.scores.size();
    if (!run.informative) continue;
    fm.groups.push_back(run.id);
    fm.thresholds.push_back(group_threshold(run, opts.threshold_margin));
  }
  fm.flags.assign(users, std::vector<std::uint8_t>(fm.groups.size(), 0));
  for (std::size_t gi = 0; gi < fm.groups.size(); ++gi) {
    const ScoreRun& run = scores.run(fm.groups[gi]);
    for (std::size_t u = 0; u < users; ++u) {
      fm.flags[u][gi] = run.scores[u] >= fm.thresholds[gi] ? 1 : 0;
    }
  }
  return fm;
}

DependencyTable case1_dependency(const FlagMatrix& fm) {
  DependencyTable table;
  const std::size_t users = fm.flags.size();
  for (std::size_t u = 0; u < users; ++u) {
    int k = fm.flag_count(u);
    if (k > 6) k = 6;  // cannot happen with six groups; clamp defensively
    ++table.count[k];
  }
  for (int k = 0; k <= 6; ++k) {
    table.percent[k] =
        users == 0 ? (k == 0 ? 100.0 : 0.0)
                   : 100.0 * static_cast<double>(table.count[k]) /
                         static_cast<double>(users);
  }
  return table;
}

std::vector<SubsetRate> case2_combinations(const FlagMatrix& fm) {
  std::vector<SubsetRate> rates;
  const std::size_t g = fm.groups.size();
  const std::size_t users = fm.flags.size();
  if (g == 0) return rates;
  for (std::uint32_t mask = 1; mask < (1u << g); ++mask) {
    SubsetRate rate;
    for (std::size_t i = 0; i < g; ++i) {
      if (mask & (1u << i)) rate.groups.push_back(fm.groups[i]);
    }
    for (std::size_t u = 0; u < users; ++u) {
      bool all = true;
      for (std::size_t i = 0; i < g && all; ++i) {
        if ((mask & (1u << i)) && !fm.flags[u][i]) all = false;
      }
      rate.count += all ? 1 : 0;
    }
    rate.percent = users == 0 ? 0.0
                              : 100.0 * static_cast<double>(rate.count) /
                                    static_cast<double>(users);
    rates.push_back(std::move(rate));
  }
  return rates;
}

ScoreHistogram score_histogram(const ScoreRun& run, double bin_width) {
  ScoreHistogram h;
  h.run = run.name;
  h.bin_width = bin_width;
  std::size_t bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width));
  h.counts.assign(bins, 0);
  for (double s : run.scores) {
    std::size_t b = static_cast<std::size_t>(s / bin_width);
    if (b >= bins) b = bins - 1;  // score exactly 1.0
    ++h.counts[b];
  }
  return h;
}

AnomalyReport build_report(const std::vector<UserId>& users, ScoreSet scores,
                           const AnalysisOptions& opts) {
  AnomalyReport report;
  report.users = users;
  report.scores = std::move(scores);
  report.flags = build_flag_matrix(report.scores, opts);
  report.case1 = case1_dependency(report.flags);
  report.case2 = case2_combinations(report.flags);
  for (const auto& run : report.scores.runs) {
    report.histograms.push_back(score_histogram(run));
  }
  report.seed = opts.forest.seed;

  // Rank by combined score, descending; ties keep cohort order.
  const auto& combined = report.scores.run(ScoreRunId::combined).scores;
  std::vector<std::uint32_t> order(users.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return combined[a] > combined[b];
                   });
  report.combined_rank.assign(users.size(), 0);
  for (std::uint32_t pos = 0; pos < order.size(); ++pos) {
    report.combined_rank[order[pos]] = pos + 1;
  }
  return report;
}

nlohmann::ordered_json report_to_json(const AnomalyReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed;
  j["user_count"] = report.users.size();

  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& run : report.scores.runs) {
    nlohmann::ordered_json r;
    r["name"] = run.name;
    r["informative"] = run.informative;
    r["columns"] = {run.column_begin, run.column_end};
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);

  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (std::size_t gi = 0; gi < report.flags.groups.size(); ++gi) {
    nlohmann::ordered_json g;
    g["name"] = to_string(report.flags.groups[gi]);
    g["threshold"] = report.flags.thresholds[gi];
    groups.push_back(std::move(g));
  }
  j["flagged_groups"] = std::move(groups);

  nlohmann::ordered_json users = nlohmann::ordered_json::array();
  for (std::size_t u = 0; u < report.users.size(); ++u) {
    nlohmann::ordered_json entry;
    entry["id"] = report.users[u];
    nlohmann::ordered_json scores;
    for (const auto& run : report.scores.runs) {
      scores[run.name] = run.scores[u];
    }
    entry["scores"] = std::move(scores);
    nlohmann::ordered_json flags;
    for (std::size_t gi = 0; gi < report.flags.groups.size(); ++gi) {
      flags[to_string(report.flags.groups[gi])] = report.flags.flags[u][gi];
    }
    entry["flags"] = std::move(flags);
    entry["flag_count"] = report.flags.flag_count(u);
    entry["combined_rank"] = report.combined_rank[u];
    users.push_back(std::move(entry));
  }
  j["users"] = std::move(users);

  nlohmann::ordered_json case1;
  for (int k = 0; k <= 6; ++k) {
    case1[std::to_string(k)] = report.case1.percent[k];
  }
  j["case1_percent_by_flag_count"] = std::move(case1);

  nlohmann::ordered_json case2 = nlohmann::ordered_json::array();
  for (const auto& rate : report.case2) {
    nlohmann::ordered_json r;
    nlohmann::ordered_json names = nlohmann::ordered_json::array();
    for (auto id : rate.groups) names.push_back(to_string(id));
    r["groups"] = std::move(names);
    r["count"] = rate.count;
    r["percent"] = rate.percent;
    case2.push_back(std::move(r));
  }
  j["case2_subsets"] = std::move(case2);
  return j;
}

void write_scores_csv(std::ostream& out, const std::vector<UserId>& users,
                      const ScoreSet& scores) {
  out << "user_id";
  for (const auto& run : scores.runs) out << ',' << run.name;
  out << '\n';
  for (std::size_t u = 0; u < users.size(); ++u) {
    out << csv_escape(users[u]);
    for (const auto& run : scores.runs) out << ',' << format_double(run.scores[u]);
    out << '\n';
  }
}

void write_flags_csv(std::ostream& out, const AnomalyReport& report) {
  out << "user_id";
  for (auto id : report.flags.groups) out << ',' << to_string(id);
  out << '\n';
  for (std::size_t u = 0; u < report.users.size(); ++u) {
    out << csv_escape(report.users[u]);
    for (std::size_t gi = 0; gi < report.flags.groups.size(); ++gi) {
      out << ',' << static_cast<int>(report.flags.flags[u][gi]);
    }
    out << '\n';
  }
}

void write_case1_csv(std::ostream& out, const DependencyTable& table) {
  out << "anomalous_parameters,percent\n";
  for (int k = 0; k <= 6; ++k) {
    out << k << ',' << format_percent(table.percent[k]) << '\n';
  }
}

void write_case2_csv(std::ostream& out, const std::vector<SubsetRate>& rates) {
  out << "groups,percent\n";
  for (const auto& rate : rates) {
    std::string names;
    for (std::size_t i = 0; i < rate.groups.size(); ++i) {
      if (i > 0) names += '+';
      names += to_string(rate.groups[i]);
    }
    out << names << ',' << format_percent(rate.percent) << '\n';
  }
}

void write_score_histograms_csv(std::ostream& out, const AnomalyReport& report) {
  out << "run,bin_lo,bin_hi,count\n";
  for (const auto& h : report.histograms) {
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      out << h.run << ',' << format_double(b * h.bin_width) << ','
          << format_double((b + 1) * h.bin_width) << ',' << h.counts[b] << '\n';
    }
  }
}

}  // namespace uba
