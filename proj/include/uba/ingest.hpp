#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "uba/csv.hpp"
#include "uba/events.hpp"

namespace uba {

enum class FileKind : std::uint8_t { logon, device, file, http, psychometric, roster };
const char* to_string(FileKind k);

// Fatal: the header row is missing or does not match the documented schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fatal only under strict mode: a data row failed validation.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RejectReason : std::uint8_t {
  bad_column_count,
  bad_timestamp,
  bad_activity,
  empty_field,
  bad_number,
  duplicate_user,
};
const char* to_string(RejectReason r);

struct IngestStats {
  std::uint64_t rows_read = 0;
  std::uint64_t rows_accepted = 0;
  std::uint64_t rows_rejected = 0;
  std::map<std::string, std::uint64_t> reject_reasons;

  void count_reject(RejectReason r) {
    ++rows_rejected;
    ++reject_reasons[to_string(r)];
  }
  void merge(const IngestStats& other);
  bool consistent() const {
    return rows_read == rows_accepted + rows_rejected;
  }
};

struct ParseOptions {
  bool strict = false;  // strict: any row-level failure throws ParseError
};

// Per-record-type schema: expected header, field parsing, serialization.
template <class Record>
struct RecordTraits;

// Pull-based typed reader over one CSV stream. The header row is validated in
// the constructor; data rows are parsed on demand. Malformed rows are counted
// and skipped (or fatal under strict mode). The timestamp format is detected
// from the first data row and then enforced for the rest of the file.
template <class Record>
class RecordStream {
 public:
  explicit RecordStream(std::istream& in, ParseOptions opts = {});

  // Next accepted record, or nullopt at end of input.
  std::optional<Record> next();

  const IngestStats& stats() const { return stats_; }
  std::optional<TimestampFormat> detected_format() const { return format_; }

 private:
  CsvReader reader_;
  ParseOptions opts_;
  IngestStats stats_;
  std::optional<TimestampFormat> format_;
  std::vector<std::string> row_;
};

using LogonStream = RecordStream<LogonEvent>;
using DeviceStream = RecordStream<DeviceEvent>;
using FileStream = RecordStream<FileEvent>;
using HttpStream = RecordStream<HttpEvent>;
using PsychometricStream = RecordStream<PsychometricRecord>;
using RosterStream = RecordStream<RosterRecord>;

// Convenience: drains a stream into a vector. Only for cohort-scale inputs.
template <class Record>
std::vector<Record> read_all(std::istream& in, IngestStats& stats,
                             ParseOptions opts = {});

// Serializes one record back to the documented CSV schema (including the
// leading id / employee_name column, emitted as a running counter).
template <class Record>
void write_record_csv(std::ostream& out, const Record& rec, std::uint64_t id,
                      TimestampFormat fmt = TimestampFormat::iso8601);

template <class Record>
void write_header_csv(std::ostream& out);

// ---------------------------------------------------------------------------
// Roster and psychometric tables
// ---------------------------------------------------------------------------

class Roster {
 public:
  // Returns false (and counts a duplicate_user reject) if the user was
  // already present.
  bool add(RosterRecord rec);

  const RosterRecord* find(const UserId& user) const;
  std::optional<std::string> department_of(const UserId& user) const;

  // Users of one department, sorted by id. This ordering defines the row
  // order of every downstream per-user artifact.
  std::vector<UserId> users_in_department(const std::string& department) const;
  std::vector<UserId> all_users() const;  // sorted by id

  std::size_t size() const { return records_.size(); }
  const std::vector<RosterRecord>& records() const { return records_; }

 private:
  std::vector<RosterRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

Roster build_roster(std::istream& in, IngestStats& stats, ParseOptions opts = {});

class PsychometricTable {
 public:
  bool add(PsychometricRecord rec);
  const PsychometricRecord* find(const UserId& user) const;
  std::size_t size() const { return records_.size(); }
  const std::vector<PsychometricRecord>& records() const { return records_; }

 private:
  std::vector<PsychometricRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

PsychometricTable build_psychometric_table(std::istream& in, IngestStats& stats,
                                           ParseOptions opts = {});

// ---------------------------------------------------------------------------
// Department filtering
// ---------------------------------------------------------------------------

struct FilterStats {
  std::uint64_t passed = 0;
  std::uint64_t dropped_other_department = 0;
  std::uint64_t dropped_unknown_user = 0;
};

// Keeps records whose user belongs to the given department. Users missing
// from the roster are dropped and counted, never fatal. An empty department
// string keeps every rostered user.
class DepartmentFilter {
 public:
  DepartmentFilter(const Roster& roster, std::string department)
      : roster_(roster), department_(std::move(department)) {}

  bool keep(const UserId& user);
  const FilterStats& stats() const { return stats_; }

 private:
  const Roster& roster_;
  std::string department_;
  FilterStats stats_;
};

// ---------------------------------------------------------------------------
// Corpus summary (per-department record counts)
// ---------------------------------------------------------------------------

class CorpusSummary {
 public:
  struct Row {
    std::string functional_unit;
    std::string department;
    std::uint64_t users = 0;
    std::uint64_t http = 0;
    std::uint64_t logon = 0;
    std::uint64_t device = 0;
    std::uint64_t file = 0;
    std::uint64_t psychometric = 0;
  };

  void add_record(const std::string& department, FileKind kind,
                  std::uint64_t n = 1);
  void set_cohort(const std::string& functional_unit,
                  const std::string& department, std::uint64_t user_count);

  std::vector<Row> rows() const;  // sorted by department
  void write_csv(std::ostream& out) const;

 private:
  std::map<std::string, Row> by_department_;
};

}  // namespace uba
