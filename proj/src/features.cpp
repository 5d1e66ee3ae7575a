#include "uba/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace uba {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct OptionalSummaries {
  std::optional<TimeSummary> logon, logoff, insert, remove;
};

// Column layout constants. The canonical order is:
//   degree | 25 subgraph | 8 logon/logoff | 10 removable media | web | OCEAN
constexpr std::size_t kDegreeCol = 0;
constexpr std::size_t kSubgraphBegin = 1;
constexpr std::size_t kLogonBegin = 26;
constexpr std::size_t kRemovableBegin = 34;
constexpr std::size_t kDailyMaxCol = 42;
constexpr std::size_t kDailyModeCol = 43;
constexpr std::size_t kWebCol = 44;
constexpr std::size_t kPsychBegin = 45;

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::optional<TimeSummary> summarize_times(std::span<const double> minutes) {
  if (minutes.empty()) return std::nullopt;
  TimeSummary s;
  s.min = minutes[0];
  s.max = minutes[0];
  double sum = 0;
  std::map<int, std::uint32_t> minute_counts;
  for (double m : minutes) {
    s.min = std::min(s.min, m);
    s.max = std::max(s.max, m);
    sum += m;
    ++minute_counts[static_cast<int>(m)];  // whole-minute bucket
  }
  s.mean = sum / static_cast<double>(minutes.size());
  std::uint32_t best = 0;
  int best_minute = 0;
  for (const auto& [minute, count] : minute_counts) {
    if (count > best) {  // map iterates ascending, so earliest wins ties
      best = count;
      best_minute = minute;
    }
  }
  s.mode = static_cast<double>(best_minute);
  return s;
}

const char* to_string(FeatureGroupId id) {
  switch (id) {
    case FeatureGroupId::graph: return "graph";
    case FeatureGroupId::subgraph: return "subgraph";
    case FeatureGroupId::logon_logoff: return "logon_logoff";
    case FeatureGroupId::removable_media: return "removable_media";
    case FeatureGroupId::web: return "web";
    case FeatureGroupId::psychometric: return "psychometric";
  }
  return "?";
}

const std::vector<FeatureGroup>& feature_groups() {
  static const std::vector<FeatureGroup> groups = {
      {FeatureGroupId::graph, "graph", 0, 1},
      {FeatureGroupId::subgraph, "subgraph", kSubgraphBegin, kSubgraphBegin + 25},
      {FeatureGroupId::logon_logoff, "logon_logoff", kLogonBegin, kLogonBegin + 8},
      {FeatureGroupId::removable_media, "removable_media", kRemovableBegin,
       kRemovableBegin + 10},
      {FeatureGroupId::web, "web", kWebCol, kWebCol + 1},
      {FeatureGroupId::psychometric, "psychometric", kPsychBegin, kPsychBegin + 5},
  };
  return groups;
}

const std::vector<std::string>& feature_column_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    out.push_back("degree");
    for (const auto& name : subgraph_block_column_names()) out.push_back(name);
    for (const char* kind : {"logon", "logoff"}) {
      for (const char* stat : {"min", "max", "mean", "mode"}) {
        out.push_back(std::string(kind) + "_" + stat);
      }
    }
    for (const char* kind : {"insert", "remove"}) {
      for (const char* stat : {"min", "max", "mean", "mode"}) {
        out.push_back(std::string(kind) + "_" + stat);
      }
    }
    out.push_back("daily_copies_max");
    out.push_back("daily_copies_mode");
    out.push_back("unique_urls");
    for (const char* trait : {"o", "c", "e", "a", "n"}) {
      out.push_back(std::string("ocean_") + trait);
    }
    return out;
  }();
  return names;
}

std::pair<std::size_t, std::size_t> subgraph_order_columns(int order) {
  std::size_t begin = kSubgraphBegin + (order - 1) * kMetricsPerOrder;
  return {begin, begin + kMetricsPerOrder};
}

FeatureBuilder::FeatureBuilder(std::vector<UserId> cohort)
    : cohort_(std::move(cohort)) {
  std::sort(cohort_.begin(), cohort_.end());
  cohort_.erase(std::unique(cohort_.begin(), cohort_.end()), cohort_.end());
  activity_.resize(cohort_.size());
  for (std::size_t i = 0; i < cohort_.size(); ++i) slot_.emplace(cohort_[i], i);
}

int FeatureBuilder::user_slot(const UserId& user) const {
  auto it = slot_.find(user);
  return it == slot_.end() ? -1 : static_cast<int>(it->second);
}

void FeatureBuilder::add(const LogonEvent& e) {
  int slot = user_slot(e.user);
  if (slot < 0) return;
  auto& a = activity_[slot];
  if (e.activity == LogonActivity::logon) {
    a.logon_minutes.push_back(e.timestamp.minutes_of_day());
  } else {
    a.logoff_minutes.push_back(e.timestamp.minutes_of_day());
  }
}

void FeatureBuilder::add(const DeviceEvent& e) {
  int slot = user_slot(e.user);
  if (slot < 0) return;
  auto& a = activity_[slot];
  if (e.activity == DeviceActivity::insert) {
    a.insert_minutes.push_back(e.timestamp.minutes_of_day());
  } else {
    a.remove_minutes.push_back(e.timestamp.minutes_of_day());
  }
}

void FeatureBuilder::add(const FileEvent& e) {
  int slot = user_slot(e.user);
  if (slot < 0) return;
  ++activity_[slot].daily_file_copies[e.timestamp.day_number()];
}

void FeatureBuilder::add(const HttpEvent& e) {
  int slot = user_slot(e.user);
  if (slot < 0) return;
  activity_[slot].url_hashes.insert(fnv1a64(e.url));
}

void FeatureBuilder::set_psychometrics(const PsychometricTable& table) {
  for (std::size_t i = 0; i < cohort_.size(); ++i) {
    activity_[i].psychometric = table.find(cohort_[i]);
  }
}

FeatureMatrix FeatureBuilder::assemble(const BipartiteGraph& g,
                                       FeatureOptions opts) const {
  const std::size_t n = cohort_.size();
  FeatureMatrix m;
  m.users = cohort_;
  m.values.assign(n * kFeatureCount, 0.0);

  std::vector<OptionalSummaries> summaries(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = activity_[i];
    summaries[i].logon = summarize_times(a.logon_minutes);
    summaries[i].logoff = summarize_times(a.logoff_minutes);
    summaries[i].insert = summarize_times(a.insert_minutes);
    summaries[i].remove = summarize_times(a.remove_minutes);
  }

  // Cohort means per time-like column, over users who have data.
  auto column_means = [&](auto member) {
    std::array<double, 4> sums{};
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = summaries[i].*member;
      if (!s) continue;
      auto vals = s->as_array();
      for (int k = 0; k < 4; ++k) sums[k] += vals[k];
      ++count;
    }
    std::array<double, 4> means{};
    if (count > 0 && opts.impute == ImputePolicy::cohort_mean) {
      for (int k = 0; k < 4; ++k) means[k] = sums[k] / static_cast<double>(count);
    }
    return means;
  };
  const std::array<double, 4> logon_fill = column_means(&OptionalSummaries::logon);
  const std::array<double, 4> logoff_fill = column_means(&OptionalSummaries::logoff);
  const std::array<double, 4> insert_fill = column_means(&OptionalSummaries::insert);
  const std::array<double, 4> remove_fill = column_means(&OptionalSummaries::remove);

  std::array<double, 5> psych_fill{};
  if (opts.impute == ImputePolicy::cohort_mean) {
    std::array<double, 5> sums{};
    std::size_t count = 0;
    for (const auto& a : activity_) {
      if (!a.psychometric) continue;
      const auto& p = *a.psychometric;
      sums = {sums[0] + p.openness, sums[1] + p.conscientiousness,
              sums[2] + p.extroversion, sums[3] + p.agreeableness,
              sums[4] + p.neuroticism};
      ++count;
    }
    if (count > 0) {
      for (int k = 0; k < 5; ++k) psych_fill[k] = sums[k] / static_cast<double>(count);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    double* row = m.values.data() + i * kFeatureCount;
    auto u = g.find_user(cohort_[i]);
    if (!u) {
      throw AssemblyError("cohort user missing from graph: " + cohort_[i]);
    }
    row[kDegreeCol] = static_cast<double>(g.degree(*u));

    auto block = subgraph_feature_block(g, *u, opts.ego);
    std::copy(block.begin(), block.end(), row + kSubgraphBegin);

    auto put_summary = [&](const std::optional<TimeSummary>& s,
                           const std::array<double, 4>& fill, std::size_t at) {
      auto vals = s ? s->as_array() : fill;
      std::copy(vals.begin(), vals.end(), row + at);
    };
    put_summary(summaries[i].logon, logon_fill, kLogonBegin);
    put_summary(summaries[i].logoff, logoff_fill, kLogonBegin + 4);
    put_summary(summaries[i].insert, insert_fill, kRemovableBegin);
    put_summary(summaries[i].remove, remove_fill, kRemovableBegin + 4);

    // Daily file-copy counts over active days only; with no active days both
    // count features stay 0.
    const auto& copies = activity_[i].daily_file_copies;
    if (!copies.empty()) {
      std::uint32_t max_count = 0;
      std::map<std::uint32_t, std::uint32_t> count_freq;
      for (const auto& [day, count] : copies) {
        max_count = std::max(max_count, count);
        ++count_freq[count];
      }
      std::uint32_t best_freq = 0;
      std::uint32_t mode_count = 0;
      for (const auto& [count, freq] : count_freq) {
        if (freq > best_freq) {  // ascending iteration: smallest count wins ties
          best_freq = freq;
          mode_count = count;
        }
      }
      row[kDailyMaxCol] = static_cast<double>(max_count);
      row[kDailyModeCol] = static_cast<double>(mode_count);
    }

    row[kWebCol] = static_cast<double>(activity_[i].url_hashes.size());

    if (const PsychometricRecord* p = activity_[i].psychometric) {
      row[kPsychBegin + 0] = p->openness;
      row[kPsychBegin + 1] = p->conscientiousness;
      row[kPsychBegin + 2] = p->extroversion;
      row[kPsychBegin + 3] = p->agreeableness;
      row[kPsychBegin + 4] = p->neuroticism;
    } else if (opts.strict_psychometric) {
      throw AssemblyError("no psychometric record for user: " + cohort_[i]);
    } else {
      std::copy(psych_fill.begin(), psych_fill.end(), row + kPsychBegin);
    }
  }

  for (double v : m.values) {
    if (!std::isfinite(v)) {
      throw AssemblyError("non-finite value in assembled feature matrix");
    }
  }
  return m;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
  out << "user_id";
  for (const auto& name : feature_column_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << csv_escape(m.users[i]);
    for (double v : m.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row)) {
    throw SchemaError("missing header row in feature matrix");
  }
  const auto& names = feature_column_names();
  if (row.size() != names.size() + 1 || row[0] != "user_id") {
    throw SchemaError("feature matrix header does not match the canonical layout");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (row[i + 1] != names[i]) {
      throw SchemaError("unexpected feature column '" + row[i + 1] + "'");
    }
  }
  FeatureMatrix m;
  while (reader.next_row(row)) {
    if (row.size() != names.size() + 1) {
      throw ParseError("feature matrix row has wrong column count");
    }
    m.users.push_back(row[0]);
    for (std::size_t i = 0; i < names.size(); ++i) {
      const std::string& text = row[i + 1];
      char* end = nullptr;
      double v = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size()) {
        throw ParseError("bad numeric value in feature matrix: " + text);
      }
      m.values.push_back(v);
    }
  }
  return m;
}

void write_subgraph_metric_histograms_csv(std::ostream& out,
                                          const FeatureMatrix& m, int bins) {
  out << "metric,order,bin_lo,bin_hi,count\n";
  static constexpr const char* metric_names[] = {
      "vertex_count", "edge_count", "density", "weighted_diameter",
      "peer_count"};
  if (bins < 1) bins = 1;
  for (int order = 1; order <= kMaxSubgraphOrder; ++order) {
    auto [begin, _] = subgraph_order_columns(order);
    for (int k = 0; k < kMetricsPerOrder; ++k) {
      std::size_t col = begin + k;
      double lo = 0, hi = 0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        double v = m.at(i, col);
        if (i == 0) lo = hi = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      double width = (hi - lo) / bins;
      if (width <= 0) width = 1;
      std::vector<std::uint64_t> counts(bins, 0);
      for (std::size_t i = 0; i < m.size(); ++i) {
        int b = static_cast<int>((m.at(i, col) - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        ++counts[b];
      }
      for (int b = 0; b < bins; ++b) {
        out << metric_names[k] << ',' << order << ','
            << format_double(lo + b * width) << ','
            << format_double(lo + (b + 1) * width) << ',' << counts[b] << '\n';
      }
    }
  }
}

}  // namespace uba
