#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uba/pipeline.hpp"
#include "uba/synth.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  CLI::Option* config_opt = nullptr;
  std::uint64_t seed = 1;
  CLI::Option* seed_opt = nullptr;
  std::string department;
  CLI::Option* department_opt = nullptr;
  std::string out_dir;
  CLI::Option* out_opt = nullptr;
  bool strict = false;
  CLI::Option* strict_opt = nullptr;
  int trees = 100;
  CLI::Option* trees_opt = nullptr;
  int subsample = 256;
  CLI::Option* subsample_opt = nullptr;
};

// Common pipeline flags. Environment variables mirror every flag with the
// UBA_ prefix; precedence is flag > environment > config file > default.
void add_common(CLI::App* cmd, CommonArgs& args) {
  args.config_opt = cmd->add_option("--config", args.config_path,
                                    "JSON configuration file")
                        ->envname("UBA_CONFIG");
  args.seed_opt =
      cmd->add_option("--seed", args.seed, "master seed")->envname("UBA_SEED");
  args.department_opt = cmd->add_option("--department", args.department,
                                        "department filter")
                            ->envname("UBA_DEPARTMENT");
  args.out_opt =
      cmd->add_option("--out", args.out_dir, "output directory")->envname("UBA_OUT");
  args.strict_opt = cmd->add_flag("--strict", args.strict,
                                  "treat malformed rows as fatal")
                        ->envname("UBA_STRICT");
  args.trees_opt = cmd->add_option("--trees", args.trees,
                                   "isolation forest ensemble size")
                       ->envname("UBA_TREES");
  args.subsample_opt = cmd->add_option("--subsample", args.subsample,
                                       "isolation forest subsample size")
                           ->envname("UBA_SUBSAMPLE");
}

uba::PipelineConfig build_config(const CommonArgs& args) {
  uba::PipelineConfig cfg;
  if (args.config_opt->count() > 0) {
    std::ifstream in(args.config_path);
    if (!in) {
      throw std::runtime_error("cannot open config file: " + args.config_path);
    }
    nlohmann::json j;
    in >> j;
    cfg = uba::PipelineConfig::from_json(j);
  }
  if (args.seed_opt->count() > 0) cfg.seed = args.seed;
  if (args.department_opt->count() > 0) cfg.department = args.department;
  if (args.out_opt->count() > 0) cfg.output_dir = args.out_dir;
  if (args.strict_opt->count() > 0) cfg.strict = args.strict;
  if (args.trees_opt->count() > 0) cfg.trees = args.trees;
  if (args.subsample_opt->count() > 0) cfg.subsample = args.subsample;
  return cfg;
}

int run_command(const char* name, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "uba " << name << ": error: " << e.what() << '\n';
    return 1;
  }
}

uba::ScenarioSpec parse_scenario(const std::string& text) {
  // kind[:user[:intensity]]
  uba::ScenarioSpec spec;
  std::string kind = text;
  std::size_t colon = text.find(':');
  if (colon != std::string::npos) {
    kind = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);
    std::size_t colon2 = rest.find(':');
    if (colon2 != std::string::npos) {
      spec.user = rest.substr(0, colon2);
      spec.intensity = std::stod(rest.substr(colon2 + 1));
    } else {
      spec.user = rest;
    }
  }
  auto parsed = uba::scenario_from_string(kind);
  if (!parsed) {
    throw CLI::ValidationError("--scenario",
                               "unknown scenario kind '" + kind + "'");
  }
  spec.kind = *parsed;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-based user behavior anomaly detection pipeline"};
  app.require_subcommand(1);

  struct StageCommand {
    const char* name;
    const char* help;
    void (*fn)(const uba::PipelineConfig&);
  };
  static constexpr StageCommand stage_commands[] = {
      {"ingest", "parse, validate and filter the raw CSV logs", uba::run_ingest_stage},
      {"graph", "build the user-device graph from the ingest store", uba::run_graph_stage},
      {"features", "assemble the 50-column feature matrix", uba::run_features_stage},
      {"score", "run the isolation forest over the feature matrix", uba::run_score_stage},
      {"report", "thresholds, flags and dependency tables from scores", uba::run_report_stage},
      {"run", "all stages end to end, with a manifest", uba::run_all_stages},
  };

  std::vector<std::pair<const StageCommand*, CommonArgs>> stages;
  stages.reserve(std::size(stage_commands));
  for (const auto& sc : stage_commands) {
    CLI::App* cmd = app.add_subcommand(sc.name, sc.help);
    stages.push_back({&sc, {}});
    add_common(cmd, stages.back().second);
  }

  // synth: generate a corpus with optional planted scenarios.
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic corpus with ground-truth labels");
  int synth_users = 130;
  int synth_days = 90;
  int synth_other = 0;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "corpus";
  std::string synth_department = "Engineering";
  std::vector<std::string> synth_scenarios;
  synth->add_option("--users", synth_users, "cohort size")->envname("UBA_USERS");
  synth->add_option("--days", synth_days, "calendar days")->envname("UBA_DAYS");
  synth->add_option("--other-users", synth_other,
                    "extra users in a second department");
  synth->add_option("--seed", synth_seed, "generator seed")->envname("UBA_SEED");
  synth->add_option("--out", synth_out, "corpus directory")->envname("UBA_OUT");
  synth->add_option("--department", synth_department, "cohort department")
      ->envname("UBA_DEPARTMENT");
  synth->add_option("--scenario", synth_scenarios,
                    "planted scenario kind[:user[:intensity]]; repeatable");

  CLI11_PARSE(app, argc, argv);

  for (auto& [sc, args] : stages) {
    if (app.got_subcommand(sc->name)) {
      const StageCommand* cmd = sc;
      CommonArgs* a = &args;
      return run_command(cmd->name, [cmd, a] {
        uba::PipelineConfig cfg = build_config(*a);
        cmd->fn(cfg);
      });
    }
  }

  if (app.got_subcommand("synth")) {
    return run_command("synth", [&] {
      uba::SynthConfig cfg;
      cfg.n_users = synth_users;
      cfg.n_days = synth_days;
      cfg.other_department_users = synth_other;
      cfg.seed = synth_seed;
      cfg.department = synth_department;
      for (const auto& text : synth_scenarios) {
        cfg.scenarios.push_back(parse_scenario(text));
      }
      uba::SynthResult result = uba::generate_corpus(cfg, synth_out);
      std::cout << "corpus written to " << synth_out << ": " << result.counts.logon
                << " logon, " << result.counts.device << " device, "
                << result.counts.file << " file, " << result.counts.http
                << " http rows; " << result.ground_truth.entries.size()
                << " planted user(s)\n";
    });
  }
  return 0;
}
