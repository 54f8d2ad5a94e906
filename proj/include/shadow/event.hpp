#pragma once

#include <string>

#include <json.hpp>

#include "shadow/ids.hpp"

namespace shadow {

// One mutation in the append-only log. The log doubles as persistence:
// replaying it reconstructs the store exactly.
struct ChangeEvent {
  Seq seq = 0;
  std::string timestamp;
  ProcessId process = kNoId;
  RuleId rule = kNoId;
  std::string op;
  nlohmann::json payload;
  std::string feed_source;  // optional "where"

  nlohmann::json to_json() const;
  static ChangeEvent from_json(const nlohmann::json& j);
  std::string to_line() const;               // one JSON line, stable key order
  static ChangeEvent from_line(const std::string& line);
};

}  // namespace shadow
