#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uba/analysis.hpp"
#include "uba/features.hpp"
#include "uba/graph.hpp"
#include "uba/ingest.hpp"

namespace uba {

struct PipelineConfig {
  struct Inputs {
    std::string logon = "logon.csv";
    std::string device = "device.csv";
    std::string file = "file.csv";
    std::string http = "http.csv";
    std::string psychometric = "psychometric.csv";
    std::string roster = "roster.csv";
  } inputs;

  std::string department;  // empty = every rostered user
  bool strict = false;
  bool keep_isolated_users = true;
  std::string impute = "cohort_mean";       // or "zero"
  std::string density = "simple";           // or "bipartite_max"
  bool invert_distance_weights = false;
  int trees = 100;
  int subsample = 256;
  std::uint64_t seed = 1;
  double uninformative_band = 0.05;
  double threshold_margin = 0.1;
  std::string output_dir = "out";

  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  FeatureOptions feature_options() const;
  AnalysisOptions analysis_options() const;
  ParseOptions parse_options() const { return {strict}; }
};

// FNV-1a over the canonical JSON dump; recorded in the manifest.
std::string config_hash(const PipelineConfig& cfg);

struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StoreStats {
  IngestStats logon, device, file, http, psychometric, roster;
  FilterStats filter;
  CorpusSummary summary;
  std::size_t cohort_size = 0;
};

// In-memory cohort data: the filtered event set, feature builder fed with
// every event (http rows are folded in without being materialized), roster
// and psychometric tables.
struct CorpusData {
  std::vector<UserId> cohort;
  Roster roster;
  PsychometricTable psychometrics;
  std::vector<LogonEvent> logons;
  std::vector<DeviceEvent> devices;
  std::vector<FileEvent> files;
  FeatureBuilder features;
  StoreStats stats;
};

// Reads a corpus laid out as the six configured input files under `dir`
// (empty path components resolve against cfg.inputs as-is), filters to the
// configured department. When `store_dir` is set the accepted cohort rows are
// also re-emitted there in normalized form (ISO timestamps, Insert/Remove).
CorpusData load_corpus(const PipelineConfig& cfg,
                       const std::filesystem::path& dir,
                       std::optional<std::filesystem::path> store_dir,
                       bool include_http = true);

BipartiteGraph graph_from(const CorpusData& data, const PipelineConfig& cfg);

// Full in-memory run over a raw corpus directory: ingest, graph, features,
// scoring, report. No artifacts are written. Shared by tests and by the
// ground-truth recovery check.
struct AnalysisRun {
  std::vector<UserId> cohort;
  FeatureMatrix matrix;
  AnomalyReport report;
};
AnalysisRun run_analysis_in_memory(const PipelineConfig& cfg,
                                   const std::filesystem::path& corpus_dir);

// Disk-based stages. Each stage reads the artifacts of the previous one from
// cfg.output_dir, so a staged run and cmd_run produce identical outputs.
void run_ingest_stage(const PipelineConfig& cfg);
void run_graph_stage(const PipelineConfig& cfg);
void run_features_stage(const PipelineConfig& cfg);
void run_score_stage(const PipelineConfig& cfg);
void run_report_stage(const PipelineConfig& cfg);
void run_all_stages(const PipelineConfig& cfg);  // + manifest.json

}  // namespace uba
