#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shadow/engine.hpp"
#include "shadow/error.hpp"

namespace shadow {

// Upstream lifecycle events, JSON-lines on the wire:
//   {"op":"upsert","source":"P1","schema":"legal_ecid","key":"763810",
//    "fields":{"Name":"ABC Corp","Status":"A","Country":"US"},"ts":"<iso8601>"}
struct FeedEvent {
  enum class Op { Upsert, Delete, Reuse, Rollback };
  Op op = Op::Upsert;
  std::string source;
  std::string schema;
  std::string key;
  std::vector<std::pair<std::string, std::string>> fields;
  std::string ts;

  nlohmann::json to_json() const;
  static Result<FeedEvent> from_json(const nlohmann::json& j);
};

struct FeedOutcome {
  enum class Kind { Applied, Held };
  Kind kind = Kind::Applied;
  ShadowId row = kNoId;
};

// upsert: new key loads a row; seen key updates sub-shadow values in place
//         (WIDs stable).
// delete: archives the row and its sub-shadows; WIDs, relations and E-tags
//         survive (ghost resolution).
// reuse:  old row keeps its WID with archived values; a new shadow and new
//         WIDs are minted for the reused key.
// rollback: restores archived values; state is byte-identical to pre-delete.
Result<FeedOutcome> apply_feed_event(Engine& engine, const Engine::Ctx& ctx,
                                     const FeedEvent& event);

struct FeedOptions {
  bool strict = false;  // abort on first malformed line / failed event
  // Buffer events whose named field references a key not yet loaded in the
  // named schema; buffered events are retried as later events land.
  std::string hold_ref_schema;
  std::string hold_ref_column;
};

struct IngestReport {
  std::size_t upserts = 0;
  std::size_t deletes = 0;
  std::size_t reuses = 0;
  std::size_t rollbacks = 0;
  std::size_t held = 0;  // still unresolved at end of feed
  std::vector<std::string> errors;

  std::size_t applied() const { return upserts + deletes + reuses + rollbacks; }
  nlohmann::json to_json() const;
};

Result<IngestReport> load_feed_lines(Engine& engine, const Engine::Ctx& ctx,
                                     const std::vector<std::string>& lines,
                                     const FeedOptions& options = {});
Result<IngestReport> load_feed_file(Engine& engine, const Engine::Ctx& ctx,
                                    const std::string& path, const FeedOptions& options = {});

}  // namespace shadow
