#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "uba/synth.hpp"

using namespace uba;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("uba_synth_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SynthConfig small_config(std::uint64_t seed = 5) {
  SynthConfig cfg;
  cfg.n_users = 40;
  cfg.n_days = 30;
  cfg.seed = seed;
  return cfg;
}

PipelineConfig corpus_pipeline_config(const fs::path& dir) {
  PipelineConfig cfg;
  cfg.inputs.logon = (dir / "logon.csv").string();
  cfg.inputs.device = (dir / "device.csv").string();
  cfg.inputs.file = (dir / "file.csv").string();
  cfg.inputs.http = (dir / "http.csv").string();
  cfg.inputs.psychometric = (dir / "psychometric.csv").string();
  cfg.inputs.roster = (dir / "roster.csv").string();
  cfg.department = "Engineering";
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("generated corpus round-trips through ingestion with zero rejects") {
  TempDir dir("roundtrip");
  auto result = generate_corpus(small_config(), dir.path);

  PipelineConfig cfg = corpus_pipeline_config(dir.path);
  CorpusData data = load_corpus(cfg, {}, std::nullopt);

  CHECK(data.stats.logon.rows_rejected == 0);
  CHECK(data.stats.device.rows_rejected == 0);
  CHECK(data.stats.file.rows_rejected == 0);
  CHECK(data.stats.http.rows_rejected == 0);
  CHECK(data.stats.psychometric.rows_rejected == 0);
  CHECK(data.stats.roster.rows_rejected == 0);

  // Emission counters are the oracle for the ingest counts.
  CHECK(data.stats.logon.rows_read == result.counts.logon);
  CHECK(data.stats.device.rows_read == result.counts.device);
  CHECK(data.stats.file.rows_read == result.counts.file);
  CHECK(data.stats.http.rows_read == result.counts.http);
  CHECK(data.stats.psychometric.rows_read == result.counts.psychometric);
  CHECK(data.stats.roster.rows_read == result.counts.roster);
  CHECK(data.cohort.size() == 40);

  // Corpus summary sees the same totals (single department here).
  auto rows = data.stats.summary.rows();
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].logon == result.counts.logon);
  CHECK(rows[0].http == result.counts.http);
  CHECK(rows[0].users == 40);
}

TEST_CASE("timestamps are non-decreasing within each generated file") {
  TempDir dir("sorted");
  generate_corpus(small_config(17), dir.path);
  for (const char* name : {"logon.csv", "device.csv", "file.csv", "http.csv"}) {
    std::ifstream in(dir.path / name, std::ios::binary);
    CsvReader reader(in);
    std::vector<std::string> row;
    REQUIRE(reader.next_row(row));  // header
    std::optional<Timestamp> prev;
    std::optional<TimestampFormat> fmt;
    while (reader.next_row(row)) {
      if (!fmt) fmt = detect_timestamp_format(row[1]);
      auto ts = parse_timestamp(row[1], *fmt);
      REQUIRE(ts);
      if (prev) CHECK(!(*ts < *prev));
      prev = ts;
    }
  }
}

TEST_CASE("zero scenarios leave the ground truth empty") {
  TempDir dir("clean");
  auto result = generate_corpus(small_config(11), dir.path);
  CHECK(result.ground_truth.entries.empty());
  CHECK(slurp(dir.path / "ground_truth.csv") == "user_id,scenario\n");
}

TEST_CASE("scenario targeting an unknown user is an argument error") {
  TempDir dir("badtarget");
  SynthConfig cfg = small_config();
  cfg.scenarios.push_back({ScenarioKind::after_hours_logon, "U9999", 1.0});
  CHECK_THROWS_AS(generate_corpus(cfg, dir.path), std::invalid_argument);
}

TEST_CASE("size preconditions are enforced") {
  TempDir dir("toosmall");
  SynthConfig cfg;
  cfg.n_users = 1;
  CHECK_THROWS_AS(generate_corpus(cfg, dir.path), std::invalid_argument);
  cfg.n_users = 10;
  cfg.n_days = 2;
  CHECK_THROWS_AS(generate_corpus(cfg, dir.path), std::invalid_argument);
}

TEST_CASE("same seed reproduces the corpus byte for byte") {
  TempDir a("rep_a"), b("rep_b");
  SynthConfig cfg = small_config(23);
  cfg.scenarios.push_back({ScenarioKind::usb_mass_copy, "", 1.0});
  generate_corpus(cfg, a.path);
  generate_corpus(cfg, b.path);
  for (const char* name : {"logon.csv", "device.csv", "file.csv", "http.csv",
                           "psychometric.csv", "roster.csv", "ground_truth.csv"}) {
    CHECK(slurp(a.path / name) == slurp(b.path / name));
  }
}

TEST_CASE("usb participation sits near the configured rate") {
  TempDir dir("usb");
  SynthConfig cfg;
  cfg.n_users = 130;
  cfg.n_days = 30;
  cfg.seed = 29;
  auto result = generate_corpus(cfg, dir.path);
  // 20% of 130 = 26 users; scenario-free corpus has exactly the drawn set.
  CHECK(result.usb_users.size() == 26);

  PipelineConfig pcfg = corpus_pipeline_config(dir.path);
  CorpusData data = load_corpus(pcfg, {}, std::nullopt);
  std::set<UserId> seen;
  for (const auto& e : data.devices) seen.insert(e.user);
  double fraction = static_cast<double>(seen.size()) / 130.0;
  CHECK(fraction >= 0.10);
  CHECK(fraction <= 0.30);
}

TEST_CASE("after-hours scenario shows up in the emitted logon file") {
  TempDir dir("nights");
  SynthConfig cfg = small_config(31);
  cfg.scenarios.push_back({ScenarioKind::after_hours_logon, "U0007", 1.0});
  auto result = generate_corpus(cfg, dir.path);
  REQUIRE(result.ground_truth.entries.size() == 1);
  CHECK(result.ground_truth.entries[0].first == "U0007");

  // Re-ingest and check the planted user's maximum logon minute.
  PipelineConfig pcfg = corpus_pipeline_config(dir.path);
  CorpusData data = load_corpus(pcfg, {}, std::nullopt);
  double max_logon = 0;
  double max_other = 0;
  for (const auto& e : data.logons) {
    if (e.activity != LogonActivity::logon) continue;
    double m = e.timestamp.minutes_of_day();
    if (e.user == "U0007") {
      max_logon = std::max(max_logon, m);
    } else {
      max_other = std::max(max_other, m);
    }
  }
  CHECK(max_logon >= 1320);  // at or after 22:00
  CHECK(max_other < 1320);
}

TEST_CASE("device hopper dominates the degree distribution") {
  TempDir dir("hopper");
  SynthConfig cfg = small_config(37);
  cfg.scenarios.push_back({ScenarioKind::device_hopper, "U0003", 1.0});
  generate_corpus(cfg, dir.path);
  PipelineConfig pcfg = corpus_pipeline_config(dir.path);
  CorpusData data = load_corpus(pcfg, {}, std::nullopt);
  auto g = graph_from(data, pcfg);
  std::size_t hopper = g.degree(UserId("U0003"));
  std::size_t best_other = 0;
  for (std::uint32_t u = 0; u < g.user_count(); ++u) {
    if (g.user_id(u) == "U0003") continue;
    best_other = std::max(best_other, g.degree(u));
  }
  CHECK(hopper >= 2 * best_other);
}

TEST_CASE("browsing burst inflates the unique url count") {
  TempDir dir("burst");
  SynthConfig cfg = small_config(41);
  cfg.scenarios.push_back({ScenarioKind::browsing_burst, "U0005", 1.0});
  generate_corpus(cfg, dir.path);
  PipelineConfig pcfg = corpus_pipeline_config(dir.path);
  AnalysisRun run = run_analysis_in_memory(pcfg, {});
  const auto& names = feature_column_names();
  std::size_t url_col = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "unique_urls") url_col = i;
  }
  std::vector<double> counts;
  double planted = 0;
  for (std::size_t i = 0; i < run.matrix.size(); ++i) {
    double v = run.matrix.at(i, url_col);
    if (run.matrix.users[i] == "U0005") {
      planted = v;
    } else {
      counts.push_back(v);
    }
  }
  std::sort(counts.begin(), counts.end());
  double median = counts[counts.size() / 2];
  CHECK(planted >= 3 * median);
}

TEST_CASE("other-department users are generated and filtered out") {
  TempDir dir("other");
  SynthConfig cfg = small_config(43);
  cfg.other_department_users = 6;
  auto result = generate_corpus(cfg, dir.path);
  CHECK(result.counts.roster == 46);
  PipelineConfig pcfg = corpus_pipeline_config(dir.path);
  CorpusData data = load_corpus(pcfg, {}, std::nullopt);
  CHECK(data.cohort.size() == 40);
  CHECK(data.stats.filter.dropped_other_department > 0);
  auto rows = data.stats.summary.rows();
  CHECK(rows.size() == 2);
}

TEST_CASE("scenario-free degree histogram decays beyond the modal bin") {
  int decaying = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    TempDir dir("deghist" + std::to_string(t));
    SynthConfig cfg;
    cfg.n_users = 80;
    cfg.n_days = 40;
    cfg.seed = 900 + t;
    generate_corpus(cfg, dir.path);
    PipelineConfig pcfg = corpus_pipeline_config(dir.path);
    CorpusData data = load_corpus(pcfg, {}, std::nullopt,
                                  /*include_http=*/false);
    auto g = graph_from(data, pcfg);
    auto h = degree_histogram(g, 1);
    std::size_t modal = 0;
    for (std::size_t i = 1; i < h.counts.size(); ++i) {
      if (h.counts[i] > h.counts[modal]) modal = i;
    }
    std::size_t last = h.counts.size();
    while (last > 0 && h.counts[last - 1] == 0) --last;
    bool strict = true;
    for (std::size_t i = modal + 1; i < last; ++i) {
      if (h.counts[i] >= h.counts[i - 1]) strict = false;
    }
    if (strict) ++decaying;
    CHECK(h.total() == g.user_count());
  }
  CHECK(decaying >= 9);  // >= 90% of seeds
}

TEST_CASE("ground truth recovery finds strongly planted users") {
  TempDir dir("recover");
  SynthConfig cfg;
  cfg.n_users = 130;
  cfg.n_days = 60;
  cfg.seed = 47;
  cfg.scenarios.push_back({ScenarioKind::device_hopper, "", 1.0});
  cfg.scenarios.push_back({ScenarioKind::usb_mass_copy, "", 1.0});
  auto result = generate_corpus(cfg, dir.path);

  PipelineConfig pcfg = corpus_pipeline_config(dir.path);
  pcfg.seed = 4242;
  auto stats = verify_ground_truth_recovery(dir.path, result.ground_truth, pcfg);
  REQUIRE(stats.planted.size() == 2);
  CHECK(stats.cohort_size == 130);
  for (const auto& p : stats.planted) {
    CHECK(p.combined_rank >= 1);
    CHECK(p.combined_rank <= 5);
  }
  CHECK(stats.flagged_fraction <= 0.25);
}
