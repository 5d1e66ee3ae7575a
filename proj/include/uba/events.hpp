#pragma once

#include <cstdint>
#include <string>

#include "uba/timestamp.hpp"

namespace uba {

// User and device ids are opaque strings. Their namespaces are kept apart by
// vertex-kind tags in the graph, not by any naming convention.
using UserId = std::string;
using DeviceId = std::string;

enum class LogonActivity : std::uint8_t { logon, logoff };
enum class DeviceActivity : std::uint8_t { insert, remove };

const char* to_string(LogonActivity a);
const char* to_string(DeviceActivity a);

struct LogonEvent {
  Timestamp timestamp;
  UserId user;
  DeviceId pc;
  LogonActivity activity = LogonActivity::logon;

  bool operator==(const LogonEvent&) const = default;
};

struct DeviceEvent {
  Timestamp timestamp;
  UserId user;
  DeviceId pc;
  DeviceActivity activity = DeviceActivity::insert;

  bool operator==(const DeviceEvent&) const = default;
};

struct FileEvent {
  Timestamp timestamp;
  UserId user;
  DeviceId pc;
  std::string filename;
  std::string content;  // retained but never analyzed

  bool operator==(const FileEvent&) const = default;
};

struct HttpEvent {
  Timestamp timestamp;
  UserId user;
  DeviceId pc;
  std::string url;
  std::string content;  // retained but never analyzed

  bool operator==(const HttpEvent&) const = default;
};

// Big-five personality scores, one record per user.
struct PsychometricRecord {
  UserId user;
  double openness = 0;
  double conscientiousness = 0;
  double extroversion = 0;
  double agreeableness = 0;
  double neuroticism = 0;

  bool operator==(const PsychometricRecord&) const = default;
};

struct RosterRecord {
  UserId user;
  std::string functional_unit;
  std::string department;
  std::string role;

  bool operator==(const RosterRecord&) const = default;
};

}  // namespace uba
