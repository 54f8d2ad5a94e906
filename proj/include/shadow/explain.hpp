#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "shadow/error.hpp"
#include "shadow/event.hpp"
#include "shadow/store.hpp"

namespace shadow {

struct ExplainTarget {
  enum class Type { Wid, Shadow, Etag };
  Type type = Type::Wid;
  std::uint64_t id = kNoId;
};

// "#12" / "wid:12" / "shadow:12" / "etag:12"
Result<ExplainTarget> parse_explain_target(const std::string& text);

struct QuestionSet {
  bool who = false, what = false, when = false, where = false, why = false, how = false;
  static QuestionSet all() { return {true, true, true, true, true, true}; }
  bool any() const { return who || what || when || where || why || how; }
};

struct Explanation {
  nlohmann::json structured;
  std::string prose;
};

// Answers who/what/when/where/why/how for a WID, shadow, or E-tag from the
// change log. Derived WIDs include their derivation chain; E-tags include
// evidence bodies and any revocation reason.
Result<Explanation> explain(const Store& store, const std::vector<ChangeEvent>& log,
                            const ExplainTarget& target, const QuestionSet& questions);

// Event ids touched by an event; explain() completeness is defined over this.
std::vector<ExplainTarget> affected_targets(const ChangeEvent& event);

// Prose templates are data: callers may replace the defaults.
struct ProseTemplates {
  std::string who = "Changed by: {who}.";
  std::string what = "Events: {what}.";
  std::string when = "At: {when}.";
  std::string where = "From sources: {where}.";
  std::string why = "Because: {why}.";
  std::string how = "How: {how}.";
};

std::string render_prose(const nlohmann::json& structured, const ProseTemplates& templates);

}  // namespace shadow
