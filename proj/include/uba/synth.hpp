#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uba/events.hpp"
#include "uba/pipeline.hpp"

namespace uba {

enum class ScenarioKind : std::uint8_t {
  after_hours_logon,
  usb_mass_copy,
  device_hopper,
  browsing_burst,
};
const char* to_string(ScenarioKind k);
std::optional<ScenarioKind> scenario_from_string(std::string_view name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::after_hours_logon;
  UserId user;              // must exist in the generated roster
  double intensity = 1.0;   // scales the scenario's signature strength
};

struct GroundTruth {
  std::vector<std::pair<UserId, ScenarioKind>> entries;
};

struct SynthConfig {
  int n_users = 130;
  int n_days = 90;
  std::string department = "Engineering";
  std::string functional_unit = "Research And Engineering";
  std::string other_department = "Research";
  int other_department_users = 0;
  double usb_user_fraction = 0.20;
  std::uint64_t seed = 1;
  std::vector<ScenarioSpec> scenarios;
};

struct EmissionCounts {
  std::uint64_t logon = 0, device = 0, file = 0, http = 0;
  std::uint64_t psychometric = 0, roster = 0;
};

struct SynthResult {
  GroundTruth ground_truth;
  EmissionCounts counts;
  std::vector<UserId> users;      // main-department cohort, sorted
  std::vector<UserId> usb_users;  // normal users with any device activity
};

// User ids are "U0001".."Unnnn"; an empty ScenarioSpec::user auto-picks a
// distinct cohort user deterministically. Writes logon.csv, device.csv,
// file.csv, http.csv, psychometric.csv, roster.csv and ground_truth.csv
// under out_dir. Timestamps within each file are non-decreasing.
// Throws std::invalid_argument for bad sizes or a scenario user outside the
// roster.
SynthResult generate_corpus(const SynthConfig& cfg,
                            const std::filesystem::path& out_dir);

struct RecoveryStats {
  struct Planted {
    UserId user;
    ScenarioKind kind{};
    std::uint32_t combined_rank = 0;  // 1 = highest combined score
    double combined_score = 0;
    bool flagged_any = false;
  };
  std::vector<Planted> planted;
  std::size_t cohort_size = 0;
  std::size_t flagged_users = 0;   // users with >= 1 flagged group
  double flagged_fraction = 0;
};

// Runs the full pipeline over a generated corpus and reports where the
// planted users landed.
RecoveryStats verify_ground_truth_recovery(
    const std::filesystem::path& corpus_dir, const GroundTruth& truth,
    const PipelineConfig& cfg);

}  // namespace uba
