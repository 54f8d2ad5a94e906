#include "shadow/feed.hpp"

#include <deque>
#include <fstream>

namespace shadow {

using nlohmann::json;

namespace {

const char* op_name(FeedEvent::Op op) {
  switch (op) {
    case FeedEvent::Op::Upsert: return "upsert";
    case FeedEvent::Op::Delete: return "delete";
    case FeedEvent::Op::Reuse: return "reuse";
    case FeedEvent::Op::Rollback: return "rollback";
  }
  return "upsert";
}

// The row and every sub-shadow created by its load; feed deletes archive the
// whole subtree so rollback restores it byte-identically.
std::vector<ShadowId> row_subtree(const Store& store, ShadowId row) {
  std::vector<ShadowId> out;
  std::deque<ShadowId> frontier{row};
  std::set<ShadowId> seen{row};
  while (!frontier.empty()) {
    const ShadowId id = frontier.front();
    frontier.pop_front();
    out.push_back(id);
    if (const Shadow* s = store.shadow(id)) {
      for (const auto& [role, sub] : s->subs) {
        if (seen.insert(sub).second) frontier.push_back(sub);
      }
    }
  }
  return out;
}

// The wire format keeps the upstream key outside "fields"; the key column
// itself is still an observable of the row.
std::vector<std::pair<std::string, std::string>> fields_with_key(const Store& store,
                                                                 const SimulatedSchema& schema,
                                                                 const FeedEvent& e) {
  std::vector<std::pair<std::string, std::string>> values = e.fields;
  if (schema.key_kind == kNoId) return values;
  const WTagKind* key_kind = store.kind(schema.key_kind);
  if (!key_kind) return values;
  for (const auto& [name, _] : values) {
    if (name == key_kind->name) return values;
  }
  values.insert(values.begin(), {key_kind->name, e.key});
  return values;
}

Result<FeedOutcome> apply_upsert(Engine& engine, const Engine::Ctx& ctx, const FeedEvent& e,
                                 SchemaId schema) {
  const std::vector<ShadowId>* history = engine.store().feed_rows(schema, e.key);
  if (!history || history->empty()) {
    auto row = engine.load_row(ctx, schema,
                               fields_with_key(engine.store(), *engine.store().schema(schema), e),
                               e.key);
    if (!row) return row.error();
    return FeedOutcome{FeedOutcome::Kind::Applied, *row};
  }
  // Seen key: in-place value update; WIDs stay stable. A key that was
  // archived upstream and upserted again gets its values restored first.
  const ShadowId row = history->back();
  const SimulatedSchema* sch = engine.store().schema(schema);
  for (ShadowId id : row_subtree(engine.store(), row)) {
    const Shadow* s = engine.store().shadow(id);
    if (s && s->archived) {
      if (auto r = engine.restore_values(ctx, id); !r) return r.error();
    }
  }
  for (const auto& [name, value] : e.fields) {
    KindId col_kind = kNoId;
    for (const auto& col : sch->columns) {
      const WTagKind* k = engine.store().kind(col.kind);
      if (k && k->name == name) {
        col_kind = col.kind;
        const PTag* t = engine.store().ptag(col.ptag);
        if (!format_accepts(t->format, value)) {
          return make_error(Errc::FormatRejected,
                            "value \"" + value + "\" for column \"" + name + "\" rejected");
        }
        break;
      }
    }
    if (col_kind == kNoId) {
      return make_error(Errc::InvalidArgument, "unknown feed column \"" + name + "\"");
    }
    // Existing sub-shadow of this kind: update in place.
    ShadowId existing = kNoId;
    const Shadow* row_shadow = engine.store().shadow(row);
    for (const auto& [role, sub] : row_shadow->subs) {
      for (Wid wid : engine.store().wids_on_shadow(sub)) {
        if (engine.store().instance(wid)->kind == col_kind) {
          existing = sub;
          break;
        }
      }
      if (existing != kNoId) break;
    }
    if (existing != kNoId) {
      if (auto r = engine.update_value(ctx, existing, value); !r) return r.error();
    } else {
      // Column was null before: a new sub-shadow and fresh WID appear.
      engine.begin();
      auto subs = engine.decompose_shadow(ctx, row, {{name, value}});
      if (!subs) {
        engine.abort();
        return subs.error();
      }
      auto wid = engine.attach_wtag(ctx, subs->front(), col_kind);
      if (!wid) {
        engine.abort();
        return wid.error();
      }
      Wid row_wid = kNoId;
      for (Wid w : engine.store().wids_on_shadow(row)) {
        if (engine.store().instance(w)->kind == sch->row_kind) {
          row_wid = w;
          break;
        }
      }
      if (row_wid != kNoId) {
        auto rel = engine.assert_relation(ctx, {RelEnd::Level::Instance, *wid},
                                          {RelEnd::Level::Instance, row_wid}, Marker::Unmarked);
        if (!rel) {
          engine.abort();
          return rel.error();
        }
      }
      if (auto c = engine.commit(); !c) {
        engine.abort();
        return c.error();
      }
    }
  }
  return FeedOutcome{FeedOutcome::Kind::Applied, row};
}

Result<FeedOutcome> apply_delete(Engine& engine, const Engine::Ctx& ctx, const FeedEvent& e,
                                 SchemaId schema) {
  const std::vector<ShadowId>* history = engine.store().feed_rows(schema, e.key);
  if (!history || history->empty()) {
    return make_error(Errc::UnknownKey, "delete for key \"" + e.key + "\" never seen");
  }
  const ShadowId row = history->back();
  engine.begin();
  for (ShadowId id : row_subtree(engine.store(), row)) {
    const Shadow* s = engine.store().shadow(id);
    if (s && !s->archived && !s->purged) {
      if (auto r = engine.archive_values(ctx, id); !r) {
        engine.abort();
        return r.error();
      }
    }
  }
  if (auto c = engine.commit(); !c) {
    engine.abort();
    return c.error();
  }
  return FeedOutcome{FeedOutcome::Kind::Applied, row};
}

Result<FeedOutcome> apply_rollback(Engine& engine, const Engine::Ctx& ctx, const FeedEvent& e,
                                   SchemaId schema) {
  const std::vector<ShadowId>* history = engine.store().feed_rows(schema, e.key);
  if (!history || history->empty()) {
    return make_error(Errc::UnknownKey, "rollback for key \"" + e.key + "\" never seen");
  }
  const ShadowId row = history->back();
  const Shadow* s = engine.store().shadow(row);
  if (!s || !s->archived) {
    return make_error(Errc::NothingToRestore, "key \"" + e.key + "\" has no archived values");
  }
  engine.begin();
  for (ShadowId id : row_subtree(engine.store(), row)) {
    const Shadow* sub = engine.store().shadow(id);
    if (sub && sub->archived) {
      if (auto r = engine.restore_values(ctx, id); !r) {
        engine.abort();
        return r.error();
      }
    }
  }
  if (auto c = engine.commit(); !c) {
    engine.abort();
    return c.error();
  }
  return FeedOutcome{FeedOutcome::Kind::Applied, row};
}

Result<FeedOutcome> apply_reuse(Engine& engine, const Engine::Ctx& ctx, const FeedEvent& e,
                                SchemaId schema) {
  const std::vector<ShadowId>* history = engine.store().feed_rows(schema, e.key);
  if (!history || history->empty()) {
    return make_error(Errc::UnknownKey, "reuse for key \"" + e.key + "\" never seen");
  }
  // The old meaning keeps its WIDs with archived values; the reused key gets
  // a brand-new shadow and fresh WIDs (W-tag Rule #4).
  const ShadowId old_row = history->back();
  const Shadow* old = engine.store().shadow(old_row);
  if (old && !old->archived) {
    FeedEvent del = e;
    if (auto r = apply_delete(engine, ctx, del, schema); !r) return r.error();
  }
  auto row = engine.load_row(ctx, schema,
                             fields_with_key(engine.store(), *engine.store().schema(schema), e),
                             e.key);
  if (!row) return row.error();
  return FeedOutcome{FeedOutcome::Kind::Applied, *row};
}

}  // namespace

json FeedEvent::to_json() const {
  json fields_obj = json::object();
  for (const auto& [k, v] : fields) fields_obj[k] = v;
  return {{"op", op_name(op)}, {"source", source}, {"schema", schema},
          {"key", key},        {"fields", fields_obj}, {"ts", ts}};
}

Result<FeedEvent> FeedEvent::from_json(const json& j) {
  FeedEvent e;
  const std::string op = j.at("op").get<std::string>();
  if (op == "upsert") {
    e.op = Op::Upsert;
  } else if (op == "delete") {
    e.op = Op::Delete;
  } else if (op == "reuse") {
    e.op = Op::Reuse;
  } else if (op == "rollback") {
    e.op = Op::Rollback;
  } else {
    return make_error(Errc::InvalidArgument, "unknown feed op \"" + op + "\"");
  }
  e.source = j.value("source", "");
  e.schema = j.at("schema").get<std::string>();
  e.key = j.at("key").get<std::string>();
  if (e.key.empty()) return make_error(Errc::InvalidArgument, "feed event key must be non-empty");
  if (j.contains("fields")) {
    for (const auto& [k, v] : j.at("fields").items()) {
      e.fields.emplace_back(k, v.get<std::string>());
    }
  }
  e.ts = j.value("ts", "");
  return e;
}

Result<FeedOutcome> apply_feed_event(Engine& engine, const Engine::Ctx& ctx,
                                     const FeedEvent& event) {
  auto schema = engine.store().schema_by_name(event.schema);
  if (!schema) return make_error(Errc::NotFound, "unknown schema \"" + event.schema + "\"");
  Engine::Ctx feed_ctx = ctx;
  if (feed_ctx.feed_source.empty()) feed_ctx.feed_source = event.source;
  switch (event.op) {
    case FeedEvent::Op::Upsert: return apply_upsert(engine, feed_ctx, event, *schema);
    case FeedEvent::Op::Delete: return apply_delete(engine, feed_ctx, event, *schema);
    case FeedEvent::Op::Reuse: return apply_reuse(engine, feed_ctx, event, *schema);
    case FeedEvent::Op::Rollback: return apply_rollback(engine, feed_ctx, event, *schema);
  }
  return make_error(Errc::InvalidArgument, "unhandled feed op");
}

json IngestReport::to_json() const {
  return {{"upserts", upserts},   {"deletes", deletes}, {"reuses", reuses},
          {"rollbacks", rollbacks}, {"held", held},     {"errors", errors}};
}

Result<IngestReport> load_feed_lines(Engine& engine, const Engine::Ctx& ctx,
                                     const std::vector<std::string>& lines,
                                     const FeedOptions& options) {
  IngestReport report;
  std::vector<FeedEvent> held;

  auto ref_ready = [&](const FeedEvent& e) -> bool {
    if (options.hold_ref_column.empty()) return true;
    auto schema = engine.store().schema_by_name(options.hold_ref_schema);
    if (!schema) return true;
    for (const auto& [name, value] : e.fields) {
      if (name != options.hold_ref_column) continue;
      const auto* rows = engine.store().feed_rows(*schema, value);
      return rows && !rows->empty();
    }
    return true;  // no referencing field present
  };

  auto count = [&](const FeedEvent& e) {
    switch (e.op) {
      case FeedEvent::Op::Upsert: ++report.upserts; break;
      case FeedEvent::Op::Delete: ++report.deletes; break;
      case FeedEvent::Op::Reuse: ++report.reuses; break;
      case FeedEvent::Op::Rollback: ++report.rollbacks; break;
    }
  };

  auto retry_held = [&] {
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (auto it = held.begin(); it != held.end();) {
        if (!ref_ready(*it)) {
          ++it;
          continue;
        }
        auto outcome = apply_feed_event(engine, ctx, *it);
        if (outcome) {
          count(*it);
          it = held.erase(it);
          progressed = true;
        } else {
          report.errors.push_back(outcome.error().message);
          it = held.erase(it);
        }
      }
    }
  };

  std::size_t line_no = 0;
  for (const std::string& line : lines) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      const std::string msg = "line " + std::to_string(line_no) + ": malformed JSON";
      if (options.strict) return make_error(Errc::ParseError, msg);
      report.errors.push_back(msg);
      continue;
    }
    auto parsed = FeedEvent::from_json(j);
    if (!parsed) {
      const std::string msg = "line " + std::to_string(line_no) + ": " + parsed.error().message;
      if (options.strict) return make_error(parsed.error().code, msg);
      report.errors.push_back(msg);
      continue;
    }
    if (!ref_ready(*parsed)) {
      held.push_back(*parsed);
      continue;
    }
    auto outcome = apply_feed_event(engine, ctx, *parsed);
    if (!outcome) {
      const std::string msg = "line " + std::to_string(line_no) + ": " + outcome.error().message;
      if (options.strict) return make_error(outcome.error().code, msg);
      report.errors.push_back(msg);
      continue;
    }
    count(*parsed);
    retry_held();
  }
  retry_held();
  report.held = held.size();
  return report;
}

Result<IngestReport> load_feed_file(Engine& engine, const Engine::Ctx& ctx,
                                    const std::string& path, const FeedOptions& options) {
  std::ifstream in(path);
  if (!in) return make_error(Errc::IoError, "cannot open feed file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return load_feed_lines(engine, ctx, lines, options);
}

}  // namespace shadow
