#include "uba/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "uba/ego.hpp"

namespace uba {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw StageError("cannot open input file: " + path.string());
  }
  return in;
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw StageError("cannot open output file: " + path.string());
  }
  return out;
}

fs::path resolve(const fs::path& dir, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute() || dir.empty()) return p;
  return dir / p;
}

nlohmann::ordered_json stats_to_json(const IngestStats& s) {
  nlohmann::ordered_json j;
  j["rows_read"] = s.rows_read;
  j["rows_accepted"] = s.rows_accepted;
  j["rows_rejected"] = s.rows_rejected;
  j["reject_reasons"] = s.reject_reasons;
  return j;
}

// Writes accepted cohort rows back out in normalized form.
class StoreWriter {
 public:
  explicit StoreWriter(const fs::path& dir) : dir_(dir) {
    fs::create_directories(dir);
  }

  template <class Record>
  void open(std::ofstream& out, const char* name) {
    out = open_output(dir_ / name);
    write_header_csv<Record>(out);
  }

  template <class Record>
  void append(std::ofstream& out, const Record& rec, std::uint64_t& counter) {
    write_record_csv(out, rec, ++counter);
  }

 private:
  fs::path dir_;
};

const std::vector<std::string>& store_file_names() {
  static const std::vector<std::string> names = {
      "logon.csv", "device.csv", "file.csv",
      "http.csv",  "psychometric.csv", "roster.csv"};
  return names;
}

PipelineConfig store_reader_config(const PipelineConfig& cfg) {
  PipelineConfig store = cfg;
  store.inputs = {};  // canonical names inside the store directory
  return store;
}

fs::path store_dir(const PipelineConfig& cfg) {
  return fs::path(cfg.output_dir) / "store";
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  if (j.contains("inputs")) {
    const auto& in = j.at("inputs");
    cfg.inputs.logon = in.value("logon", cfg.inputs.logon);
    cfg.inputs.device = in.value("device", cfg.inputs.device);
    cfg.inputs.file = in.value("file", cfg.inputs.file);
    cfg.inputs.http = in.value("http", cfg.inputs.http);
    cfg.inputs.psychometric = in.value("psychometric", cfg.inputs.psychometric);
    cfg.inputs.roster = in.value("roster", cfg.inputs.roster);
  }
  cfg.department = j.value("department", cfg.department);
  cfg.strict = j.value("strict", cfg.strict);
  cfg.keep_isolated_users = j.value("keep_isolated_users", cfg.keep_isolated_users);
  cfg.impute = j.value("impute", cfg.impute);
  cfg.density = j.value("density", cfg.density);
  cfg.invert_distance_weights =
      j.value("invert_distance_weights", cfg.invert_distance_weights);
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    cfg.trees = f.value("trees", cfg.trees);
    cfg.subsample = f.value("subsample", cfg.subsample);
    cfg.seed = f.value("seed", cfg.seed);
  }
  if (j.contains("analysis")) {
    const auto& a = j.at("analysis");
    cfg.uninformative_band = a.value("uninformative_band", cfg.uninformative_band);
    cfg.threshold_margin = a.value("threshold_margin", cfg.threshold_margin);
  }
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  return cfg;
}

nlohmann::ordered_json PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["inputs"] = {{"logon", inputs.logon},
                 {"device", inputs.device},
                 {"file", inputs.file},
                 {"http", inputs.http},
                 {"psychometric", inputs.psychometric},
                 {"roster", inputs.roster}};
  j["department"] = department;
  j["strict"] = strict;
  j["keep_isolated_users"] = keep_isolated_users;
  j["impute"] = impute;
  j["density"] = density;
  j["invert_distance_weights"] = invert_distance_weights;
  j["forest"] = {{"trees", trees}, {"subsample", subsample}, {"seed", seed}};
  j["analysis"] = {{"uninformative_band", uninformative_band},
                   {"threshold_margin", threshold_margin}};
  j["output_dir"] = output_dir;
  return j;
}

FeatureOptions PipelineConfig::feature_options() const {
  FeatureOptions opts;
  opts.ego.density = density == "bipartite_max" ? DensityDenominator::bipartite_max
                                                : DensityDenominator::simple;
  opts.ego.distances = invert_distance_weights ? DistanceWeights::inverted
                                               : DistanceWeights::direct;
  opts.impute = impute == "zero" ? ImputePolicy::zero : ImputePolicy::cohort_mean;
  opts.strict_psychometric = strict;
  return opts;
}

AnalysisOptions PipelineConfig::analysis_options() const {
  AnalysisOptions opts;
  opts.forest.tree_count = trees;
  opts.forest.subsample_size = subsample;
  opts.forest.seed = seed;
  opts.uninformative_band = uninformative_band;
  opts.threshold_margin = threshold_margin;
  return opts;
}

std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = fnv1a64(cfg.to_json().dump());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

CorpusData load_corpus(const PipelineConfig& cfg, const fs::path& dir,
                       std::optional<fs::path> store_path, bool include_http) {
  ParseOptions parse = cfg.parse_options();

  CorpusData data{.cohort = {},
                  .roster = {},
                  .psychometrics = {},
                  .logons = {},
                  .devices = {},
                  .files = {},
                  .features = FeatureBuilder({}),
                  .stats = {}};

  {
    auto in = open_input(resolve(dir, cfg.inputs.roster));
    data.roster = build_roster(in, data.stats.roster, parse);
  }
  data.cohort = data.roster.users_in_department(cfg.department);
  data.stats.cohort_size = data.cohort.size();
  data.features = FeatureBuilder(data.cohort);

  // Per-department corpus statistics count every rostered record, not just
  // the cohort's; unknown users land in their own bucket.
  std::map<std::string, std::uint64_t> dept_users;
  for (const auto& rec : data.roster.records()) ++dept_users[rec.department];
  for (const auto& [dept, n] : dept_users) {
    std::string unit;
    for (const auto& rec : data.roster.records()) {
      if (rec.department == dept) {
        unit = rec.functional_unit;
        break;
      }
    }
    data.stats.summary.set_cohort(unit, dept, n);
  }
  auto department_of = [&](const UserId& user) -> std::string {
    auto dept = data.roster.department_of(user);
    return dept ? *dept : std::string("<unknown>");
  };

  DepartmentFilter filter(data.roster, cfg.department);

  std::optional<StoreWriter> store;
  std::ofstream store_logon, store_device, store_file, store_http;
  std::uint64_t id_logon = 0, id_device = 0, id_file = 0, id_http = 0;
  if (store_path) {
    store.emplace(*store_path);
    store->open<LogonEvent>(store_logon, "logon.csv");
    store->open<DeviceEvent>(store_device, "device.csv");
    store->open<FileEvent>(store_file, "file.csv");
    store->open<HttpEvent>(store_http, "http.csv");
  }

  {
    auto in = open_input(resolve(dir, cfg.inputs.logon));
    LogonStream stream(in, parse);
    while (auto rec = stream.next()) {
      data.stats.summary.add_record(department_of(rec->user), FileKind::logon);
      if (!filter.keep(rec->user)) continue;
      data.features.add(*rec);
      if (store) store->append(store_logon, *rec, id_logon);
      data.logons.push_back(std::move(*rec));
    }
    data.stats.logon = stream.stats();
  }
  {
    auto in = open_input(resolve(dir, cfg.inputs.device));
    DeviceStream stream(in, parse);
    while (auto rec = stream.next()) {
      data.stats.summary.add_record(department_of(rec->user), FileKind::device);
      if (!filter.keep(rec->user)) continue;
      data.features.add(*rec);
      if (store) store->append(store_device, *rec, id_device);
      data.devices.push_back(std::move(*rec));
    }
    data.stats.device = stream.stats();
  }
  {
    auto in = open_input(resolve(dir, cfg.inputs.file));
    FileStream stream(in, parse);
    while (auto rec = stream.next()) {
      data.stats.summary.add_record(department_of(rec->user), FileKind::file);
      if (!filter.keep(rec->user)) continue;
      data.features.add(*rec);
      if (store) store->append(store_file, *rec, id_file);
      data.files.push_back(std::move(*rec));
    }
    data.stats.file = stream.stats();
  }
  if (include_http) {
    // The http file dwarfs the others; rows are folded into the feature
    // builder (and optionally the store) without ever being materialized.
    auto in = open_input(resolve(dir, cfg.inputs.http));
    HttpStream stream(in, parse);
    while (auto rec = stream.next()) {
      data.stats.summary.add_record(department_of(rec->user), FileKind::http);
      if (!filter.keep(rec->user)) continue;
      data.features.add(*rec);
      if (store) store->append(store_http, *rec, id_http);
    }
    data.stats.http = stream.stats();
  }
  {
    auto in = open_input(resolve(dir, cfg.inputs.psychometric));
    data.psychometrics =
        build_psychometric_table(in, data.stats.psychometric, parse);
    for (const auto& rec : data.psychometrics.records()) {
      data.stats.summary.add_record(department_of(rec.user),
                                    FileKind::psychometric);
    }
  }
  data.features.set_psychometrics(data.psychometrics);
  data.stats.filter = filter.stats();

  if (store) {
    auto out = open_output(*store_path / "roster.csv");
    write_header_csv<RosterRecord>(out);
    std::uint64_t id = 0;
    for (const auto& rec : data.roster.records()) {
      if (cfg.department.empty() || rec.department == cfg.department) {
        write_record_csv(out, rec, ++id);
      }
    }
    auto psych = open_output(*store_path / "psychometric.csv");
    write_header_csv<PsychometricRecord>(psych);
    id = 0;
    for (const auto& rec : data.psychometrics.records()) {
      auto dept = data.roster.department_of(rec.user);
      if (dept && (cfg.department.empty() || *dept == cfg.department)) {
        write_record_csv(psych, rec, ++id);
      }
    }
  }
  return data;
}

BipartiteGraph graph_from(const CorpusData& data, const PipelineConfig& cfg) {
  return build_graph(data.logons, data.cohort, cfg.keep_isolated_users);
}

AnalysisRun run_analysis_in_memory(const PipelineConfig& cfg,
                                   const fs::path& corpus_dir) {
  CorpusData data = load_corpus(cfg, corpus_dir, std::nullopt);
  BipartiteGraph graph = graph_from(data, cfg);
  AnalysisRun run;
  run.cohort = data.cohort;
  run.matrix = data.features.assemble(graph, cfg.feature_options());
  ScoreSet scores = score_groups(run.matrix, cfg.analysis_options());
  run.report = build_report(run.cohort, std::move(scores), cfg.analysis_options());
  return run;
}

void run_ingest_stage(const PipelineConfig& cfg) {
  CorpusData data = load_corpus(cfg, {}, store_dir(cfg));

  nlohmann::ordered_json j;
  j["cohort_size"] = data.stats.cohort_size;
  j["department"] = cfg.department;
  j["files"] = {{"logon", stats_to_json(data.stats.logon)},
                {"device", stats_to_json(data.stats.device)},
                {"file", stats_to_json(data.stats.file)},
                {"http", stats_to_json(data.stats.http)},
                {"psychometric", stats_to_json(data.stats.psychometric)},
                {"roster", stats_to_json(data.stats.roster)}};
  j["filter"] = {{"passed", data.stats.filter.passed},
                 {"dropped_other_department",
                  data.stats.filter.dropped_other_department},
                 {"dropped_unknown_user", data.stats.filter.dropped_unknown_user}};
  auto stats_out = open_output(fs::path(cfg.output_dir) / "ingest_stats.json");
  stats_out << j.dump(2) << '\n';

  auto summary_out = open_output(fs::path(cfg.output_dir) / "corpus_summary.csv");
  data.stats.summary.write_csv(summary_out);
}

void run_graph_stage(const PipelineConfig& cfg) {
  PipelineConfig store_cfg = store_reader_config(cfg);
  CorpusData data = load_corpus(store_cfg, store_dir(cfg), std::nullopt,
                                /*include_http=*/false);
  BipartiteGraph graph = graph_from(data, cfg);
  auto edges = open_output(fs::path(cfg.output_dir) / "graph" / "edges.csv");
  graph.write_edge_list(edges);
  auto hist = open_output(fs::path(cfg.output_dir) / "graph" /
                          "degree_histogram.csv");
  write_degree_histogram_csv(hist, degree_histogram(graph, 1));
}

void run_features_stage(const PipelineConfig& cfg) {
  PipelineConfig store_cfg = store_reader_config(cfg);
  CorpusData data = load_corpus(store_cfg, store_dir(cfg), std::nullopt);
  BipartiteGraph graph = graph_from(data, cfg);
  FeatureMatrix matrix = data.features.assemble(graph, cfg.feature_options());
  auto out = open_output(fs::path(cfg.output_dir) / "features.csv");
  write_feature_csv(out, matrix);
  auto hist = open_output(fs::path(cfg.output_dir) /
                          "subgraph_metric_histograms.csv");
  write_subgraph_metric_histograms_csv(hist, matrix);
}

void run_score_stage(const PipelineConfig& cfg) {
  auto in = open_input(fs::path(cfg.output_dir) / "features.csv");
  FeatureMatrix matrix = read_feature_csv(in);
  ScoreSet scores = score_groups(matrix, cfg.analysis_options());
  auto out = open_output(fs::path(cfg.output_dir) / "scores.csv");
  write_scores_csv(out, matrix.users, scores);
}

namespace {

std::pair<std::vector<UserId>, std::vector<std::vector<double>>>
read_scores_csv(const fs::path& path) {
  auto in = open_input(path);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row)) throw StageError("scores.csv is empty");
  if (row.size() != kScoreRunCount + 1 || row[0] != "user_id") {
    throw StageError("scores.csv header does not match the run inventory");
  }
  for (int r = 0; r < kScoreRunCount; ++r) {
    if (row[r + 1] != to_string(static_cast<ScoreRunId>(r))) {
      throw StageError("unexpected score column '" + row[r + 1] + "'");
    }
  }
  std::vector<UserId> users;
  std::vector<std::vector<double>> scores(kScoreRunCount);
  while (reader.next_row(row)) {
    if (row.size() != kScoreRunCount + 1) {
      throw StageError("scores.csv row has wrong column count");
    }
    users.push_back(row[0]);
    for (int r = 0; r < kScoreRunCount; ++r) {
      scores[r].push_back(std::stod(row[r + 1]));
    }
  }
  return {std::move(users), std::move(scores)};
}

}  // namespace

void run_report_stage(const PipelineConfig& cfg) {
  auto [users, vectors] = read_scores_csv(fs::path(cfg.output_dir) / "scores.csv");
  AnalysisOptions opts = cfg.analysis_options();
  ScoreSet scores = score_set_from_vectors(vectors, opts);
  AnomalyReport report = build_report(users, std::move(scores), opts);

  auto json_out = open_output(fs::path(cfg.output_dir) / "report.json");
  json_out << report_to_json(report).dump(2) << '\n';
  auto flags = open_output(fs::path(cfg.output_dir) / "flags.csv");
  write_flags_csv(flags, report);
  auto case1 = open_output(fs::path(cfg.output_dir) / "dependency_case1.csv");
  write_case1_csv(case1, report.case1);
  auto case2 = open_output(fs::path(cfg.output_dir) / "dependency_case2.csv");
  write_case2_csv(case2, report.case2);
  auto hist = open_output(fs::path(cfg.output_dir) / "score_histograms.csv");
  write_score_histograms_csv(hist, report);
}

void run_all_stages(const PipelineConfig& cfg) {
  struct Stage {
    const char* name;
    void (*fn)(const PipelineConfig&);
  };
  static constexpr Stage stages[] = {
      {"ingest", run_ingest_stage},   {"graph", run_graph_stage},
      {"features", run_features_stage}, {"score", run_score_stage},
      {"report", run_report_stage},
  };
  for (const auto& stage : stages) {
    try {
      stage.fn(cfg);
    } catch (const std::exception& e) {
      throw StageError(std::string("[") + stage.name + "] " + e.what());
    }
  }

  nlohmann::ordered_json manifest;
  manifest["config"] = cfg.to_json();
  manifest["config_hash"] = config_hash(cfg);
  manifest["seed"] = cfg.seed;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
  for (const char* name :
       {"ingest_stats.json", "corpus_summary.csv", "graph/edges.csv",
        "graph/degree_histogram.csv", "features.csv",
        "subgraph_metric_histograms.csv", "scores.csv", "report.json",
        "flags.csv", "dependency_case1.csv", "dependency_case2.csv",
        "score_histograms.csv"}) {
    outputs.push_back(name);
  }
  for (const auto& name : store_file_names()) {
    outputs.push_back("store/" + name);
  }
  manifest["outputs"] = std::move(outputs);
  auto out = open_output(fs::path(cfg.output_dir) / "manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace uba
