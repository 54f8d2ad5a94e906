#include "shadow/event.hpp"

namespace shadow {

using nlohmann::json;

json ChangeEvent::to_json() const {
  // Stable field set: {seq, timestamp, process_id, op, payload} plus the
  // optional rule_id / feed_source.
  json j;
  j["seq"] = seq;
  j["timestamp"] = timestamp;
  j["process_id"] = process;
  if (rule != kNoId) j["rule_id"] = rule;
  j["op"] = op;
  j["payload"] = payload;
  if (!feed_source.empty()) j["feed_source"] = feed_source;
  return j;
}

ChangeEvent ChangeEvent::from_json(const json& j) {
  ChangeEvent e;
  e.seq = j.at("seq").get<Seq>();
  e.timestamp = j.at("timestamp").get<std::string>();
  e.process = j.at("process_id").get<ProcessId>();
  if (j.contains("rule_id")) e.rule = j.at("rule_id").get<RuleId>();
  e.op = j.at("op").get<std::string>();
  e.payload = j.at("payload");
  if (j.contains("feed_source")) e.feed_source = j.at("feed_source").get<std::string>();
  return e;
}

std::string ChangeEvent::to_line() const { return to_json().dump(); }

ChangeEvent ChangeEvent::from_line(const std::string& line) {
  return from_json(json::parse(line));
}

}  // namespace shadow
