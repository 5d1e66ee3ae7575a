#include "uba/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace uba {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Shared timestamp handling: detect the file's format from the first data
// row, then hold every later row to it.
std::optional<RejectReason> parse_event_timestamp(
    const std::string& text, std::optional<TimestampFormat>& fmt,
    Timestamp& out) {
  if (!fmt) {
    fmt = detect_timestamp_format(text);
    if (!fmt) return RejectReason::bad_timestamp;
  }
  auto ts = parse_timestamp(text, *fmt);
  if (!ts) return RejectReason::bad_timestamp;
  out = *ts;
  return std::nullopt;
}

}  // namespace

const char* to_string(LogonActivity a) {
  return a == LogonActivity::logon ? "Logon" : "Logoff";
}

const char* to_string(DeviceActivity a) {
  return a == DeviceActivity::insert ? "Insert" : "Remove";
}

const char* to_string(FileKind k) {
  switch (k) {
    case FileKind::logon: return "logon";
    case FileKind::device: return "device";
    case FileKind::file: return "file";
    case FileKind::http: return "http";
    case FileKind::psychometric: return "psychometric";
    case FileKind::roster: return "roster";
  }
  return "?";
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::bad_column_count: return "bad-column-count";
    case RejectReason::bad_timestamp: return "bad-timestamp";
    case RejectReason::bad_activity: return "bad-activity";
    case RejectReason::empty_field: return "empty-field";
    case RejectReason::bad_number: return "bad-number";
    case RejectReason::duplicate_user: return "duplicate-user";
  }
  return "?";
}

void IngestStats::merge(const IngestStats& other) {
  rows_read += other.rows_read;
  rows_accepted += other.rows_accepted;
  rows_rejected += other.rows_rejected;
  for (const auto& [reason, n] : other.reject_reasons) {
    reject_reasons[reason] += n;
  }
}

// ---------------------------------------------------------------------------
// Schemas
// ---------------------------------------------------------------------------

template <>
struct RecordTraits<LogonEvent> {
  static constexpr FileKind kind = FileKind::logon;
  static constexpr std::array<std::string_view, 5> columns = {
      "id", "date", "user", "pc", "activity"};

  static std::optional<RejectReason> parse(const std::vector<std::string>& row,
                                           std::optional<TimestampFormat>& fmt,
                                           LogonEvent& out) {
    if (auto r = parse_event_timestamp(row[1], fmt, out.timestamp)) return r;
    if (row[2].empty() || row[3].empty()) return RejectReason::empty_field;
    if (iequals(row[4], "Logon")) {
      out.activity = LogonActivity::logon;
    } else if (iequals(row[4], "Logoff")) {
      out.activity = LogonActivity::logoff;
    } else {
      return RejectReason::bad_activity;
    }
    out.user = row[2];
    out.pc = row[3];
    return std::nullopt;
  }

  static void serialize(std::vector<std::string>& row, const LogonEvent& rec,
                        std::uint64_t id, TimestampFormat fmt) {
    row = {std::to_string(id), format_timestamp(rec.timestamp, fmt), rec.user,
           rec.pc, to_string(rec.activity)};
  }
};

template <>
struct RecordTraits<DeviceEvent> {
  static constexpr FileKind kind = FileKind::device;
  static constexpr std::array<std::string_view, 5> columns = {
      "id", "date", "user", "pc", "activity"};

  static std::optional<RejectReason> parse(const std::vector<std::string>& row,
                                           std::optional<TimestampFormat>& fmt,
                                           DeviceEvent& out) {
    if (auto r = parse_event_timestamp(row[1], fmt, out.timestamp)) return r;
    if (row[2].empty() || row[3].empty()) return RejectReason::empty_field;
    // Both vocabularies seen in the wild are accepted and normalized.
    if (iequals(row[4], "Insert") || iequals(row[4], "Connect")) {
      out.activity = DeviceActivity::insert;
    } else if (iequals(row[4], "Remove") || iequals(row[4], "Disconnect")) {
      out.activity = DeviceActivity::remove;
    } else {
      return RejectReason::bad_activity;
    }
    out.user = row[2];
    out.pc = row[3];
    return std::nullopt;
  }

  static void serialize(std::vector<std::string>& row, const DeviceEvent& rec,
                        std::uint64_t id, TimestampFormat fmt) {
    row = {std::to_string(id), format_timestamp(rec.timestamp, fmt), rec.user,
           rec.pc, to_string(rec.activity)};
  }
};

template <>
struct RecordTraits<FileEvent> {
  static constexpr FileKind kind = FileKind::file;
  static constexpr std::array<std::string_view, 6> columns = {
      "id", "date", "user", "pc", "filename", "content"};

  static std::optional<RejectReason> parse(const std::vector<std::string>& row,
                                           std::optional<TimestampFormat>& fmt,
                                           FileEvent& out) {
    if (auto r = parse_event_timestamp(row[1], fmt, out.timestamp)) return r;
    if (row[2].empty() || row[3].empty() || row[4].empty()) {
      return RejectReason::empty_field;
    }
    out.user = row[2];
    out.pc = row[3];
    out.filename = row[4];
    out.content = row[5];
    return std::nullopt;
  }

  static void serialize(std::vector<std::string>& row, const FileEvent& rec,
                        std::uint64_t id, TimestampFormat fmt) {
    row = {std::to_string(id), format_timestamp(rec.timestamp, fmt), rec.user,
           rec.pc, rec.filename, rec.content};
  }
};

template <>
struct RecordTraits<HttpEvent> {
  static constexpr FileKind kind = FileKind::http;
  static constexpr std::array<std::string_view, 6> columns = {
      "id", "date", "user", "pc", "url", "content"};

  static std::optional<RejectReason> parse(const std::vector<std::string>& row,
                                           std::optional<TimestampFormat>& fmt,
                                           HttpEvent& out) {
    if (auto r = parse_event_timestamp(row[1], fmt, out.timestamp)) return r;
    if (row[2].empty() || row[3].empty() || row[4].empty()) {
      return RejectReason::empty_field;
    }
    out.user = row[2];
    out.pc = row[3];
    out.url = row[4];
    out.content = row[5];
    return std::nullopt;
  }

  static void serialize(std::vector<std::string>& row, const HttpEvent& rec,
                        std::uint64_t id, TimestampFormat fmt) {
    row = {std::to_string(id), format_timestamp(rec.timestamp, fmt), rec.user,
           rec.pc, rec.url, rec.content};
  }
};

template <>
struct RecordTraits<PsychometricRecord> {
  static constexpr FileKind kind = FileKind::psychometric;
  static constexpr std::array<std::string_view, 7> columns = {
      "employee_name", "user_id", "O", "C", "E", "A", "N"};

  static std::optional<RejectReason> parse(const std::vector<std::string>& row,
                                           std::optional<TimestampFormat>&,
                                           PsychometricRecord& out) {
    if (row[1].empty()) return RejectReason::empty_field;
    double scores[5];
    for (int i = 0; i < 5; ++i) {
      if (!parse_double(row[2 + i], scores[i])) return RejectReason::bad_number;
    }
    out.user = row[1];
    out.openness = scores[0];
    out.conscientiousness = scores[1];
    out.extroversion = scores[2];
    out.agreeableness = scores[3];
    out.neuroticism = scores[4];
    return std::nullopt;
  }

  static void serialize(std::vector<std::string>& row,
                        const PsychometricRecord& rec, std::uint64_t,
                        TimestampFormat) {
    row = {"",
           rec.user,
           format_double(rec.openness),
           format_double(rec.conscientiousness),
           format_double(rec.extroversion),
           format_double(rec.agreeableness),
           format_double(rec.neuroticism)};
  }
};

template <>
struct RecordTraits<RosterRecord> {
  static constexpr FileKind kind = FileKind::roster;
  static constexpr std::array<std::string_view, 4> columns = {
      "user_id", "functional_unit", "department", "role"};

  static std::optional<RejectReason> parse(const std::vector<std::string>& row,
                                           std::optional<TimestampFormat>&,
                                           RosterRecord& out) {
    if (row[0].empty()) return RejectReason::empty_field;
    out.user = row[0];
    out.functional_unit = row[1];
    out.department = row[2];
    out.role = row[3];
    return std::nullopt;
  }

  static void serialize(std::vector<std::string>& row, const RosterRecord& rec,
                        std::uint64_t, TimestampFormat) {
    row = {rec.user, rec.functional_unit, rec.department, rec.role};
  }
};

// ---------------------------------------------------------------------------
// RecordStream
// ---------------------------------------------------------------------------

template <class Record>
RecordStream<Record>::RecordStream(std::istream& in, ParseOptions opts)
    : reader_(in), opts_(opts) {
  using Traits = RecordTraits<Record>;
  std::vector<std::string> header;
  if (!reader_.next_row(header)) {
    throw SchemaError(std::string("missing header row in ") +
                      to_string(Traits::kind) + " input");
  }
  if (header.size() < Traits::columns.size()) {
    throw SchemaError(std::string("short header in ") +
                      to_string(Traits::kind) + " input");
  }
  for (std::size_t i = 0; i < Traits::columns.size(); ++i) {
    if (!iequals(header[i], Traits::columns[i])) {
      throw SchemaError(std::string("unknown header column '") + header[i] +
                        "' in " + to_string(Traits::kind) + " input, expected '" +
                        std::string(Traits::columns[i]) + "'");
    }
  }
  // Extra trailing columns are ignored.
}

template <class Record>
std::optional<Record> RecordStream<Record>::next() {
  using Traits = RecordTraits<Record>;
  while (reader_.next_row(row_)) {
    ++stats_.rows_read;
    std::optional<RejectReason> reject;
    Record rec;
    if (row_.size() < Traits::columns.size()) {
      reject = RejectReason::bad_column_count;
    } else {
      reject = Traits::parse(row_, format_, rec);
    }
    if (!reject) {
      ++stats_.rows_accepted;
      return rec;
    }
    stats_.count_reject(*reject);
    if (opts_.strict) {
      throw ParseError(std::string("row ") + std::to_string(stats_.rows_read) +
                       " of " + to_string(Traits::kind) +
                       " input rejected: " + to_string(*reject));
    }
  }
  return std::nullopt;
}

template <class Record>
std::vector<Record> read_all(std::istream& in, IngestStats& stats,
                             ParseOptions opts) {
  RecordStream<Record> stream(in, opts);
  std::vector<Record> out;
  while (auto rec = stream.next()) {
    out.push_back(std::move(*rec));
  }
  stats.merge(stream.stats());
  return out;
}

template <class Record>
void write_record_csv(std::ostream& out, const Record& rec, std::uint64_t id,
                      TimestampFormat fmt) {
  std::vector<std::string> row;
  RecordTraits<Record>::serialize(row, rec, id, fmt);
  write_csv_row(out, row);
}

template <class Record>
void write_header_csv(std::ostream& out) {
  std::vector<std::string> row;
  for (auto col : RecordTraits<Record>::columns) row.emplace_back(col);
  write_csv_row(out, row);
}

#define UBA_INSTANTIATE(Record)                                              \
  template class RecordStream<Record>;                                       \
  template std::vector<Record> read_all<Record>(std::istream&, IngestStats&, \
                                                ParseOptions);               \
  template void write_record_csv<Record>(std::ostream&, const Record&,       \
                                         std::uint64_t, TimestampFormat);    \
  template void write_header_csv<Record>(std::ostream&);

UBA_INSTANTIATE(LogonEvent)
UBA_INSTANTIATE(DeviceEvent)
UBA_INSTANTIATE(FileEvent)
UBA_INSTANTIATE(HttpEvent)
UBA_INSTANTIATE(PsychometricRecord)
UBA_INSTANTIATE(RosterRecord)
#undef UBA_INSTANTIATE

// ---------------------------------------------------------------------------
// Roster / psychometric tables
// ---------------------------------------------------------------------------

bool Roster::add(RosterRecord rec) {
  auto [it, inserted] = index_.try_emplace(rec.user, records_.size());
  if (!inserted) return false;
  records_.push_back(std::move(rec));
  return true;
}

const RosterRecord* Roster::find(const UserId& user) const {
  auto it = index_.find(user);
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::optional<std::string> Roster::department_of(const UserId& user) const {
  const RosterRecord* rec = find(user);
  if (!rec) return std::nullopt;
  return rec->department;
}

std::vector<UserId> Roster::users_in_department(
    const std::string& department) const {
  std::vector<UserId> out;
  for (const auto& rec : records_) {
    if (department.empty() || rec.department == department) {
      out.push_back(rec.user);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<UserId> Roster::all_users() const {
  return users_in_department("");
}

Roster build_roster(std::istream& in, IngestStats& stats, ParseOptions opts) {
  RosterStream stream(in, opts);
  Roster roster;
  while (auto rec = stream.next()) {
    roster.add(std::move(*rec));
  }
  IngestStats raw = stream.stats();
  // Duplicates were accepted by the row parser but dropped by the table;
  // reclassify them so read = accepted + rejected still holds.
  std::uint64_t dups = raw.rows_accepted - roster.size();
  raw.rows_accepted -= dups;
  raw.rows_rejected += dups;
  if (dups > 0) raw.reject_reasons[to_string(RejectReason::duplicate_user)] += dups;
  stats.merge(raw);
  return roster;
}

bool PsychometricTable::add(PsychometricRecord rec) {
  auto [it, inserted] = index_.try_emplace(rec.user, records_.size());
  if (!inserted) return false;
  records_.push_back(std::move(rec));
  return true;
}

const PsychometricRecord* PsychometricTable::find(const UserId& user) const {
  auto it = index_.find(user);
  return it == index_.end() ? nullptr : &records_[it->second];
}

PsychometricTable build_psychometric_table(std::istream& in, IngestStats& stats,
                                           ParseOptions opts) {
  PsychometricStream stream(in, opts);
  PsychometricTable table;
  while (auto rec = stream.next()) {
    table.add(std::move(*rec));
  }
  IngestStats raw = stream.stats();
  std::uint64_t dups = raw.rows_accepted - table.size();
  raw.rows_accepted -= dups;
  raw.rows_rejected += dups;
  if (dups > 0) raw.reject_reasons[to_string(RejectReason::duplicate_user)] += dups;
  stats.merge(raw);
  return table;
}

// ---------------------------------------------------------------------------
// Department filtering
// ---------------------------------------------------------------------------

bool DepartmentFilter::keep(const UserId& user) {
  auto dept = roster_.department_of(user);
  if (!dept) {
    ++stats_.dropped_unknown_user;
    return false;
  }
  if (!department_.empty() && *dept != department_) {
    ++stats_.dropped_other_department;
    return false;
  }
  ++stats_.passed;
  return true;
}

// ---------------------------------------------------------------------------
// Corpus summary
// ---------------------------------------------------------------------------

void CorpusSummary::add_record(const std::string& department, FileKind kind,
                               std::uint64_t n) {
  Row& row = by_department_[department];
  row.department = department;
  switch (kind) {
    case FileKind::http: row.http += n; break;
    case FileKind::logon: row.logon += n; break;
    case FileKind::device: row.device += n; break;
    case FileKind::file: row.file += n; break;
    case FileKind::psychometric: row.psychometric += n; break;
    case FileKind::roster: break;
  }
}

void CorpusSummary::set_cohort(const std::string& functional_unit,
                               const std::string& department,
                               std::uint64_t user_count) {
  Row& row = by_department_[department];
  row.department = department;
  row.functional_unit = functional_unit;
  row.users = user_count;
}

std::vector<CorpusSummary::Row> CorpusSummary::rows() const {
  std::vector<Row> out;
  out.reserve(by_department_.size());
  for (const auto& [_, row] : by_department_) out.push_back(row);
  return out;
}

void CorpusSummary::write_csv(std::ostream& out) const {
  out << "functional_unit,department,users,http,logon,device,file,psychometric\n";
  for (const auto& row : rows()) {
    std::vector<std::string> fields = {
        row.functional_unit,          row.department,
        std::to_string(row.users),    std::to_string(row.http),
        std::to_string(row.logon),    std::to_string(row.device),
        std::to_string(row.file),     std::to_string(row.psychometric)};
    write_csv_row(out, fields);
  }
}

}  // namespace uba
