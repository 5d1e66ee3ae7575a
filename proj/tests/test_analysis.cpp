#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "uba/analysis.hpp"
#include "uba/rng.hpp"

using namespace uba;

namespace {

// A ScoreSet with handcrafted vectors for the six groups (other runs 0.5).
ScoreSet handcrafted(const std::vector<std::vector<double>>& six,
                     std::size_t users, const AnalysisOptions& opts) {
  std::vector<std::vector<double>> runs(kScoreRunCount,
                                        std::vector<double>(users, 0.5));
  for (std::size_t g = 0; g < six.size(); ++g) runs[g] = six[g];
  return score_set_from_vectors(runs, opts);
}

FeatureMatrix random_matrix(std::size_t users, std::uint64_t seed) {
  SplitMix64 rng(seed);
  FeatureMatrix m;
  for (std::size_t i = 0; i < users; ++i) {
    m.users.push_back("u" + std::to_string(1000 + i));
    for (int c = 0; c < kFeatureCount; ++c) {
      m.values.push_back(rng.normal(10, 2));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("score_groups runs the full 12-run inventory") {
  auto m = random_matrix(25, 42);
  AnalysisOptions opts;
  opts.forest.seed = 7;
  opts.forest.tree_count = 30;
  auto set = score_groups(m, opts);
  REQUIRE(set.runs.size() == 12);
  const std::size_t expected_widths[] = {1, 25, 8, 10, 1, 5, 50, 5, 5, 5, 5, 5};
  for (int r = 0; r < kScoreRunCount; ++r) {
    const auto& run = set.runs[r];
    CHECK(run.scores.size() == 25);
    CHECK(run.column_end - run.column_begin == expected_widths[r]);
    for (double s : run.scores) {
      CHECK(s > 0.0);
      CHECK(s <= 1.0);
    }
  }
  // Deterministic replay.
  auto again = score_groups(m, opts);
  for (int r = 0; r < kScoreRunCount; ++r) {
    CHECK(set.runs[r].scores == again.runs[r].scores);
  }
  // Runs consume independent seed streams: the graph run (1 column) must not
  // equal the web run (1 column) even though both see similar data shapes.
  CHECK(set.runs[0].scores != set.runs[4].scores);
}

TEST_CASE("constant matrix lands every run in the uninformative regime") {
  FeatureMatrix m;
  for (int i = 0; i < 20; ++i) {
    m.users.push_back("u" + std::to_string(i));
    for (int c = 0; c < kFeatureCount; ++c) m.values.push_back(3.0);
  }
  AnalysisOptions opts;
  auto set = score_groups(m, opts);
  for (const auto& run : set.runs) {
    CHECK_FALSE(run.informative);
  }
  auto fm = build_flag_matrix(set, opts);
  CHECK(fm.groups.empty());
  auto table = case1_dependency(fm);
  CHECK(table.percent[0] == 100.0);
  for (int k = 1; k <= 6; ++k) CHECK(table.percent[k] == 0.0);
}

TEST_CASE("group threshold is max minus the margin") {
  AnalysisOptions opts;
  auto set = handcrafted({{0.9, 0.3, 0.4}}, 3, opts);
  CHECK(group_threshold(set.runs[0], 0.1) == doctest::Approx(0.8));

  auto low = handcrafted({{0.55, 0.35, 0.4}}, 3, opts);
  // The rule is applied literally even when it dips below 0.5.
  CHECK(group_threshold(low.runs[0], 0.1) == doctest::Approx(0.45));
}

TEST_CASE("threshold on an uninformative group is a contract violation") {
  AnalysisOptions opts;
  auto set = handcrafted({{0.52, 0.48, 0.5}}, 3, opts);
  CHECK_FALSE(set.runs[0].informative);
  CHECK_THROWS_AS(group_threshold(set.runs[0], 0.1), std::logic_error);
}

TEST_CASE("uninformative band boundary") {
  AnalysisOptions opts;
  opts.uninformative_band = 0.05;
  CHECK_FALSE(handcrafted({{0.45, 0.55}}, 2, opts).runs[0].informative);
  CHECK(handcrafted({{0.45, 0.5551}}, 2, opts).runs[0].informative);
}

TEST_CASE("flag matrix applies thresholds with >=") {
  AnalysisOptions opts;
  auto set = handcrafted({{0.9, 0.85, 0.6}}, 3, opts);
  auto fm = build_flag_matrix(set, opts);
  REQUIRE(fm.groups.size() == 1);
  CHECK(fm.thresholds[0] == doctest::Approx(0.8));
  CHECK(fm.flags[0][0] == 1);
  CHECK(fm.flags[1][0] == 1);  // 0.85 >= 0.8
  CHECK(fm.flags[2][0] == 0);
  // The maximum scorer is always flagged.
  CHECK(fm.flag_count(0) == 1);
}

TEST_CASE("case1 dependency on a hand-counted fixture") {
  AnalysisOptions opts;
  // Flag counts per user: {0, 0, 1, 2} over two informative groups.
  auto set = handcrafted({{0.2, 0.3, 0.9, 0.85},   // flags user 2? no: thr=0.8 -> users 2,3
                          {0.2, 0.3, 0.25, 0.9}},  // thr=0.8 -> user 3
                         4, opts);
  auto fm = build_flag_matrix(set, opts);
  REQUIRE(fm.groups.size() == 2);
  CHECK(fm.flag_count(0) == 0);
  CHECK(fm.flag_count(1) == 0);
  CHECK(fm.flag_count(2) == 1);
  CHECK(fm.flag_count(3) == 2);
  auto table = case1_dependency(fm);
  CHECK(table.percent[0] == doctest::Approx(50.0));
  CHECK(table.percent[1] == doctest::Approx(25.0));
  CHECK(table.percent[2] == doctest::Approx(25.0));
  double sum = 0;
  for (double p : table.percent) sum += p;
  CHECK(sum == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("case2 subset rates: singletons, intersection, monotonicity") {
  AnalysisOptions opts;
  auto set = handcrafted({{0.9, 0.85, 0.2, 0.2},
                          {0.9, 0.2, 0.85, 0.2}},
                         4, opts);
  auto fm = build_flag_matrix(set, opts);
  auto rates = case2_combinations(fm);
  REQUIRE(rates.size() == 3);  // two singletons + one pair

  // Singleton rates equal per-group flag rates (column means).
  for (const auto& rate : rates) {
    if (rate.groups.size() == 1) {
      CHECK(rate.percent == doctest::Approx(50.0));  // 2 of 4 flagged each
    } else {
      CHECK(rate.percent == doctest::Approx(25.0));  // only user 0 in both
    }
  }
  // Subset monotonicity: a superset can never have a higher rate.
  for (const auto& a : rates) {
    for (const auto& b : rates) {
      if (a.groups.size() < b.groups.size()) {
        bool subset = std::includes(b.groups.begin(), b.groups.end(),
                                    a.groups.begin(), a.groups.end());
        if (subset) CHECK(b.percent <= a.percent + 1e-12);
      }
    }
  }
}

TEST_CASE("report ranks by combined score and is internally consistent") {
  AnalysisOptions opts;
  std::vector<std::vector<double>> runs(kScoreRunCount);
  std::vector<UserId> users = {"a", "b", "c", "d"};
  for (int r = 0; r < kScoreRunCount; ++r) runs[r] = {0.5, 0.5, 0.5, 0.5};
  runs[static_cast<int>(ScoreRunId::combined)] = {0.4, 0.7, 0.6, 0.3};
  auto report = build_report(users, score_set_from_vectors(runs, opts), opts);
  CHECK(report.combined_rank == std::vector<std::uint32_t>{3, 1, 2, 4});

  // Histograms cover every run and count every user.
  REQUIRE(report.histograms.size() == 12);
  for (const auto& h : report.histograms) {
    std::uint64_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == users.size());
  }

  auto j = report_to_json(report);
  CHECK(j["user_count"] == 4);
  CHECK(j["users"][1]["combined_rank"] == 1);
  double sum = 0;
  for (int k = 0; k <= 6; ++k) {
    sum += j["case1_percent_by_flag_count"][std::to_string(k)].get<double>();
  }
  CHECK(sum == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("every informative group flags at least its maximum scorer") {
  auto m = random_matrix(40, 99);
  AnalysisOptions opts;
  opts.forest.tree_count = 40;
  opts.forest.seed = 3;
  auto set = score_groups(m, opts);
  auto fm = build_flag_matrix(set, opts);
  for (std::size_t gi = 0; gi < fm.groups.size(); ++gi) {
    std::uint32_t flagged = 0;
    for (std::size_t u = 0; u < 40; ++u) flagged += fm.flags[u][gi];
    CHECK(flagged >= 1);
  }
}

TEST_CASE("csv writers emit the documented layouts") {
  AnalysisOptions opts;
  auto set = handcrafted({{0.9, 0.2}}, 2, opts);
  auto report = build_report({"u1", "u2"}, std::move(set), opts);

  std::ostringstream flags;
  write_flags_csv(flags, report);
  CHECK(flags.str() == "user_id,graph\nu1,1\nu2,0\n");

  std::ostringstream case1;
  write_case1_csv(case1, report.case1);
  CHECK(case1.str().substr(0, 32) == "anomalous_parameters,percent\n0,5");

  std::ostringstream scores;
  write_scores_csv(scores, report.users, report.scores);
  std::string header = scores.str().substr(0, scores.str().find('\n'));
  CHECK(header ==
        "user_id,graph,subgraph,logon_logoff,removable_media,web,psychometric,"
        "combined,subgraph_o1,subgraph_o2,subgraph_o3,subgraph_o4,subgraph_o5");
}
