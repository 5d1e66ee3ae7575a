#include "uba/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "uba/rng.hpp"

namespace uba {

namespace fs = std::filesystem;

namespace {

// Corpus epoch: Monday 2010-01-04.
const std::int64_t kEpochDay = days_from_civil(2010, 1, 4);

bool is_workday(std::int64_t day_number) {
  unsigned wd = weekday_from_days(day_number);
  return wd >= 1 && wd <= 5;
}

Timestamp make_timestamp(std::int64_t day_number, double minutes) {
  minutes = std::clamp(minutes, 0.0, 1439.98);
  Timestamp ts;
  std::int32_t y;
  unsigned m, d;
  civil_from_days(day_number, y, m, d);
  ts.year = y;
  ts.month = static_cast<std::uint8_t>(m);
  ts.day = static_cast<std::uint8_t>(d);
  int whole = static_cast<int>(minutes);
  ts.hour = static_cast<std::uint8_t>(whole / 60);
  ts.minute = static_cast<std::uint8_t>(whole % 60);
  ts.second = static_cast<std::uint8_t>((minutes - whole) * 60.0);
  return ts;
}

std::string user_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U%04d", i);
  return buf;
}

std::string pc_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "PC%04d", i);
  return buf;
}

const char* const kDomains[] = {
    "search.portal.com",   "mail.webhost.net",    "news.daily.org",
    "wiki.reference.org",  "forum.devtalk.io",    "docs.toolchain.dev",
    "weather.report.com",  "maps.cityguide.net",  "video.streambox.tv",
    "shop.martplace.com",  "bank.securepay.com",  "travel.fareline.com",
    "code.hostforge.io",   "blog.thoughts.net",   "recipes.kitchen.org",
    "sports.scorehub.com", "music.playwave.fm",   "photo.gallery.net",
    "health.wellness.org", "jobs.careersite.com",
};
constexpr int kDomainCount = static_cast<int>(std::size(kDomains));

const char* const kWords[] = {
    "report", "quarterly", "update", "review", "notes",  "summary",
    "draft",  "final",     "spec",   "design", "budget", "plan",
};

std::string random_content(SplitMix64& rng) {
  // Occasional commas exercise the CSV quoting path end to end.
  std::string out;
  int words = 3 + static_cast<int>(rng.uniform_index(5));
  for (int i = 0; i < words; ++i) {
    if (i > 0) out += rng.next_double() < 0.2 ? ", " : " ";
    out += kWords[rng.uniform_index(std::size(kWords))];
  }
  return out;
}

std::string random_url(SplitMix64& rng, const std::vector<std::string>& pool) {
  // Mild preference for the front of the pool (habitual sites).
  double u = rng.next_double();
  std::size_t i = static_cast<std::size_t>(u * u * pool.size());
  if (i >= pool.size()) i = pool.size() - 1;
  return pool[i];
}

struct Profile {
  UserId id;
  std::string department;
  std::string pc;
  std::vector<std::string> own_pcs;
  std::vector<int> lab_visits;  // visit count per shared machine
  double logon_mu = 510, logon_sigma = 15;
  double logoff_mu = 1065, logoff_sigma = 20;
  double p_absent = 0.04;
  bool usb_user = false;
  double p_usb_day = 0.25;
  double insert_mu = 630;
  double lambda_http = 18;
  std::vector<std::string> url_pool;
  double psych[5] = {40, 40, 40, 40, 40};
};

struct EventBuffers {
  std::vector<LogonEvent> logons;
  std::vector<DeviceEvent> devices;
  std::vector<FileEvent> files;
  std::vector<HttpEvent> https;
};

void emit_usb_session(EventBuffers& out, SplitMix64& rng, const Profile& p,
                      std::int64_t day, double insert_at, int copies) {
  double remove_at = insert_at + rng.uniform(20, 90);
  out.devices.push_back({make_timestamp(day, insert_at), p.id, p.pc,
                         DeviceActivity::insert});
  for (int c = 0; c < copies; ++c) {
    double at = rng.uniform(insert_at, std::min(remove_at, 1439.0));
    char name[32];
    std::snprintf(name, sizeof(name), "F%06llu.doc",
                  static_cast<unsigned long long>(rng.next() % 1000000));
    out.files.push_back(
        {make_timestamp(day, at), p.id, p.pc, name, random_content(rng)});
  }
  out.devices.push_back({make_timestamp(day, remove_at), p.id, p.pc,
                         DeviceActivity::remove});
}

template <class Record>
void write_sorted(const fs::path& path, std::vector<Record>& events,
                  std::uint64_t& count) {
  std::stable_sort(events.begin(), events.end(),
                   [](const Record& a, const Record& b) {
                     return a.timestamp < b.timestamp;
                   });
  std::ofstream out(path, std::ios::binary);
  write_header_csv<Record>(out);
  std::uint64_t id = 0;
  for (const auto& e : events) {
    write_record_csv(out, e, ++id, TimestampFormat::month_day_year);
  }
  count = events.size();
}

}  // namespace

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::after_hours_logon: return "after_hours_logon";
    case ScenarioKind::usb_mass_copy: return "usb_mass_copy";
    case ScenarioKind::device_hopper: return "device_hopper";
    case ScenarioKind::browsing_burst: return "browsing_burst";
  }
  return "?";
}

std::optional<ScenarioKind> scenario_from_string(std::string_view name) {
  for (auto k : {ScenarioKind::after_hours_logon, ScenarioKind::usb_mass_copy,
                 ScenarioKind::device_hopper, ScenarioKind::browsing_burst}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

SynthResult generate_corpus(const SynthConfig& cfg, const fs::path& out_dir) {
  if (cfg.n_users < 2) throw std::invalid_argument("n_users must be >= 2");
  if (cfg.n_days < 5) throw std::invalid_argument("n_days must be >= 5");
  fs::create_directories(out_dir);

  SplitMix64 rng(SplitMix64::mix(cfg.seed, 0xC0FFEE));

  const int total_users = cfg.n_users + cfg.other_department_users;
  std::vector<Profile> profiles(total_users);

  // Shared lab machines create the device-sharing structure that gives higher
  // order subgraphs something to reach.
  const int shared_pool = std::max(2, cfg.n_users / 26);
  std::vector<std::string> shared_pcs;
  for (int i = 0; i < shared_pool; ++i) shared_pcs.push_back(pc_name(9000 + i));

  SynthResult result;
  for (int i = 0; i < total_users; ++i) {
    Profile& p = profiles[i];
    p.id = user_name(i + 1);
    p.department = i < cfg.n_users ? cfg.department : cfg.other_department;
    p.pc = pc_name(i + 1);
    p.own_pcs.push_back(p.pc);
    if (rng.next_double() < 0.15) {
      p.own_pcs.push_back(pc_name(5000 + i));  // personal second machine
      if (rng.next_double() < 0.25) p.own_pcs.push_back(pc_name(6000 + i));
    }
    p.logon_mu = std::clamp(rng.normal(512, 14), 480.0, 560.0);
    p.logon_sigma = rng.uniform(5, 14);
    p.logoff_mu = std::clamp(rng.normal(1060, 16), 1020.0, 1110.0);
    p.logoff_sigma = rng.uniform(8, 22);
    p.p_absent = rng.uniform(0.01, 0.07);
    // Heavy-tailed shared-machine use: most users hardly ever, a few often.
    p.p_usb_day = rng.uniform(0.18, 0.45);
    p.insert_mu = std::clamp(rng.normal(635, 12), 600.0, 670.0);
    p.lambda_http = std::clamp(rng.normal(16, 4), 8.0, 28.0);
    int pool_size = static_cast<int>(std::clamp(rng.normal(38, 7), 22.0, 60.0));
    for (int s = 0; s < pool_size; ++s) {
      const char* domain = kDomains[rng.uniform_index(kDomainCount)];
      p.url_pool.push_back("http://www." + std::string(domain) + "/page" +
                           std::to_string(rng.next() % 9000));
    }
    for (double& trait : p.psych) {
      trait = std::clamp(std::round(rng.normal(40, 5)), 25.0, 55.0);
    }
    // Everyone rotates through every shared machine during the window (the
    // lab pool works like badge-in print/build stations). Keeping the
    // rotation complete pins the higher-order neighborhood of every user to
    // the same vertex set.
    p.lab_visits.resize(shared_pool);
    for (int v = 0; v < shared_pool; ++v) p.lab_visits[v] = 1;
    for (int extra = static_cast<int>(rng.uniform_index(4)); extra > 0; --extra) {
      ++p.lab_visits[rng.uniform_index(shared_pool)];
    }
    if (i < cfg.n_users) result.users.push_back(p.id);
  }
  std::sort(result.users.begin(), result.users.end());

  // A few benign eccentrics anchor the tails the way real cohorts do: a
  // couple of heavy browsers and a couple of extreme personalities. Without
  // them every group's score distribution is one smooth bulk and the
  // max-minus-margin threshold lands inside it.
  if (cfg.n_users >= 12) {
    Profile& browser = profiles[cfg.n_users - 1];
    int extra = 70 + static_cast<int>(rng.uniform_index(30));
    for (int s = 0; s < extra; ++s) {
      const char* domain = kDomains[rng.uniform_index(kDomainCount)];
      browser.url_pool.push_back("http://www." + std::string(domain) + "/deep" +
                                 std::to_string(rng.next() % 100000));
    }
    browser.lambda_http = 28;
    Profile& person = profiles[cfg.n_users - 3];
    person.psych[0] = rng.uniform(55, 59);
    person.psych[4] = rng.uniform(13, 18);
  }

  // Exactly ~20% of main-department users get removable-media habits.
  {
    std::vector<int> idx(cfg.n_users);
    for (int i = 0; i < cfg.n_users; ++i) idx[i] = i;
    for (int i = cfg.n_users - 1; i > 0; --i) {
      std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
    }
    int usb_count = static_cast<int>(
        std::lround(cfg.usb_user_fraction * cfg.n_users));
    for (int i = 0; i < usb_count && i < cfg.n_users; ++i) {
      profiles[idx[i]].usb_user = true;
      result.usb_users.push_back(profiles[idx[i]].id);
    }
    std::sort(result.usb_users.begin(), result.usb_users.end());
  }

  // Resolve scenario targets; empty users are auto-picked from the cohort.
  std::vector<ScenarioSpec> scenarios = cfg.scenarios;
  {
    std::set<UserId> taken;
    for (const auto& s : scenarios) {
      if (!s.user.empty()) taken.insert(s.user);
    }
    for (auto& s : scenarios) {
      if (s.user.empty()) {
        for (;;) {
          UserId pick = user_name(1 + static_cast<int>(
                                          rng.uniform_index(cfg.n_users)));
          if (taken.insert(pick).second) {
            s.user = pick;
            break;
          }
        }
      }
      bool known = std::binary_search(result.users.begin(), result.users.end(),
                                      s.user);
      if (!known) {
        throw std::invalid_argument("scenario targets unknown user: " + s.user);
      }
      result.ground_truth.entries.push_back({s.user, s.kind});
    }
  }
  auto profile_of = [&](const UserId& id) -> Profile& {
    for (auto& p : profiles) {
      if (p.id == id) return p;
    }
    throw std::logic_error("profile lookup failed");
  };
  // A mass-copy scenario implies the user actually uses removable media.
  for (const auto& s : scenarios) {
    if (s.kind == ScenarioKind::usb_mass_copy) {
      profile_of(s.user).usb_user = true;
    }
  }

  EventBuffers out;

  // Baseline behavior.
  for (auto& p : profiles) {
    const bool light = p.department != cfg.department;
    for (std::size_t lab = 0; lab < p.lab_visits.size(); ++lab) {
      for (int v = 0; v < p.lab_visits[lab]; ++v) {
        int d = static_cast<int>(rng.uniform_index(cfg.n_days));
        for (int tries = 0; tries < 14 && !is_workday(kEpochDay + d); ++tries) {
          d = static_cast<int>(rng.uniform_index(cfg.n_days));
        }
        std::int64_t day = kEpochDay + d;
        double s_on = rng.uniform(600, 960);
        double s_off = s_on + rng.uniform(15, 120);
        out.logons.push_back(
            {make_timestamp(day, s_on), p.id, shared_pcs[lab], LogonActivity::logon});
        out.logons.push_back(
            {make_timestamp(day, s_off), p.id, shared_pcs[lab], LogonActivity::logoff});
      }
    }
    for (int d = 0; d < cfg.n_days; ++d) {
      std::int64_t day = kEpochDay + d;
      if (!is_workday(day)) continue;
      if (rng.next_double() < p.p_absent) continue;

      double t_on = std::clamp(rng.normal(p.logon_mu, p.logon_sigma), 300.0, 780.0);
      double t_off =
          std::clamp(rng.normal(p.logoff_mu, p.logoff_sigma), t_on + 60, 1380.0);
      const std::string& pc =
          p.own_pcs[rng.uniform_index(p.own_pcs.size())];
      out.logons.push_back(
          {make_timestamp(day, t_on), p.id, pc, LogonActivity::logon});
      // Midday screen unlocks are recorded as extra logon rows.
      int unlocks = rng.next_double() < 0.5 ? static_cast<int>(rng.uniform_index(3)) : 0;
      for (int k = 0; k < unlocks; ++k) {
        out.logons.push_back({make_timestamp(day, rng.uniform(t_on + 5, t_off - 5)),
                              p.id, pc, LogonActivity::logon});
      }
      out.logons.push_back(
          {make_timestamp(day, t_off), p.id, pc, LogonActivity::logoff});

      if (p.usb_user && !light && rng.next_double() < p.p_usb_day) {
        double insert_at =
            std::clamp(rng.normal(p.insert_mu, 14), t_on + 10, t_off - 40);
        int copies = 1 + (rng.next_double() < 0.35 ? 1 : 0) +
                     (rng.next_double() < 0.12 ? 1 : 0);
        emit_usb_session(out, rng, p, day, insert_at, copies);
      }

      int visits = light ? 2 : static_cast<int>(p.lambda_http / 2 +
                                                rng.uniform_index(static_cast<std::uint64_t>(p.lambda_http)));
      for (int v = 0; v < visits; ++v) {
        out.https.push_back({make_timestamp(day, rng.uniform(t_on, t_off)), p.id,
                             p.pc, random_url(rng, p.url_pool),
                             random_content(rng)});
      }
    }
  }

  // Planted signatures.
  for (const auto& s : scenarios) {
    Profile& p = profile_of(s.user);
    SplitMix64 srng(SplitMix64::mix(cfg.seed, 0x5C000 + fnv1a64(s.user)));
    switch (s.kind) {
      case ScenarioKind::after_hours_logon: {
        int nights = std::max(8, static_cast<int>(18 * s.intensity));
        for (int k = 0; k < nights; ++k) {
          std::int64_t day = kEpochDay + srng.uniform_index(cfg.n_days);
          // Mix of late-night and small-hours sessions; both stay inside one
          // calendar day so per-file ordering is trivial.
          double t_on = srng.next_double() < 0.6
                            ? std::clamp(srng.normal(1365, 20), 1325.0, 1420.0)
                            : std::clamp(srng.normal(55, 25), 10.0, 110.0);
          double t_off = std::clamp(t_on + srng.uniform(12, 60), t_on + 5, 1439.0);
          out.logons.push_back(
              {make_timestamp(day, t_on), p.id, p.pc, LogonActivity::logon});
          out.logons.push_back(
              {make_timestamp(day, t_off), p.id, p.pc, LogonActivity::logoff});
        }
        break;
      }
      case ScenarioKind::usb_mass_copy: {
        int days = std::max(2, static_cast<int>(3 * s.intensity));
        for (int k = 0; k < days; ++k) {
          std::int64_t day = kEpochDay + srng.uniform_index(cfg.n_days);
          double insert_at = std::clamp(srng.normal(1230, 45), 1100.0, 1350.0);
          int copies = 35 + static_cast<int>(srng.uniform_index(
                                static_cast<std::uint64_t>(25 * s.intensity)));
          emit_usb_session(out, srng, p, day, insert_at, copies);
        }
        break;
      }
      case ScenarioKind::device_hopper: {
        int hops = std::max(10, static_cast<int>(28 * s.intensity));
        for (int k = 0; k < hops; ++k) {
          std::int64_t day = kEpochDay + srng.uniform_index(cfg.n_days);
          // Hops land on other users' machines, linking their subgraphs.
          const Profile& victim = profiles[srng.uniform_index(total_users)];
          double t_on = srng.uniform(540, 1020);
          double t_off = t_on + srng.uniform(10, 45);
          out.logons.push_back({make_timestamp(day, t_on), p.id, victim.pc,
                                LogonActivity::logon});
          out.logons.push_back({make_timestamp(day, t_off), p.id, victim.pc,
                                LogonActivity::logoff});
        }
        break;
      }
      case ScenarioKind::browsing_burst: {
        int extra = std::max(200, static_cast<int>(1200 * s.intensity));
        for (int k = 0; k < extra; ++k) {
          std::int64_t day = kEpochDay + srng.uniform_index(cfg.n_days);
          std::string url = "http://rnd" + std::to_string(srng.next() % 100000000) +
                            ".example.com/item" + std::to_string(k);
          out.https.push_back({make_timestamp(day, srng.uniform(500, 1100)), p.id,
                               p.pc, url, random_content(srng)});
        }
        break;
      }
    }
  }

  write_sorted(out_dir / "logon.csv", out.logons, result.counts.logon);
  write_sorted(out_dir / "device.csv", out.devices, result.counts.device);
  write_sorted(out_dir / "file.csv", out.files, result.counts.file);
  write_sorted(out_dir / "http.csv", out.https, result.counts.http);

  {
    std::ofstream psych(out_dir / "psychometric.csv", std::ios::binary);
    write_header_csv<PsychometricRecord>(psych);
    std::uint64_t id = 0;
    for (const auto& p : profiles) {
      PsychometricRecord rec{p.id,       p.psych[0], p.psych[1],
                             p.psych[2], p.psych[3], p.psych[4]};
      write_record_csv(psych, rec, ++id);
      ++result.counts.psychometric;
    }
    std::ofstream roster(out_dir / "roster.csv", std::ios::binary);
    write_header_csv<RosterRecord>(roster);
    static const char* const roles[] = {"Engineer", "Senior Engineer",
                                        "Staff Engineer"};
    id = 0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      RosterRecord rec{profiles[i].id, cfg.functional_unit,
                       profiles[i].department, roles[i % 3]};
      write_record_csv(roster, rec, ++id);
      ++result.counts.roster;
    }
    std::ofstream truth(out_dir / "ground_truth.csv", std::ios::binary);
    truth << "user_id,scenario\n";
    for (const auto& [user, kind] : result.ground_truth.entries) {
      truth << user << ',' << to_string(kind) << '\n';
    }
  }
  return result;
}

RecoveryStats verify_ground_truth_recovery(const fs::path& corpus_dir,
                                           const GroundTruth& truth,
                                           const PipelineConfig& cfg) {
  AnalysisRun run = run_analysis_in_memory(cfg, corpus_dir);
  RecoveryStats stats;
  stats.cohort_size = run.cohort.size();
  for (std::size_t u = 0; u < run.cohort.size(); ++u) {
    if (run.report.flags.flag_count(u) > 0) ++stats.flagged_users;
  }
  stats.flagged_fraction =
      run.cohort.empty() ? 0.0
                         : static_cast<double>(stats.flagged_users) /
                               static_cast<double>(run.cohort.size());

  const auto& combined = run.report.scores.run(ScoreRunId::combined).scores;
  for (const auto& [user, kind] : truth.entries) {
    RecoveryStats::Planted p;
    p.user = user;
    p.kind = kind;
    auto it = std::find(run.cohort.begin(), run.cohort.end(), user);
    if (it != run.cohort.end()) {
      std::size_t u = static_cast<std::size_t>(it - run.cohort.begin());
      p.combined_rank = run.report.combined_rank[u];
      p.combined_score = combined[u];
      p.flagged_any = run.report.flags.flag_count(u) > 0;
    }
    stats.planted.push_back(std::move(p));
  }
  return stats;
}

}  // namespace uba
