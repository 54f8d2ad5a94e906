#include "shadow/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "shadow/clock.hpp"

namespace shadow {

using nlohmann::json;

Engine::Engine() = default;

Engine::Engine(Store initial) : store_(std::move(initial)) {}

Engine::Engine(std::filesystem::path dir) {
  std::filesystem::create_directories(dir);
  const auto lock = dir / ".lock";
  if (std::filesystem::exists(lock)) {
    throw std::runtime_error("store is locked by another writer: " + lock.string());
  }
  std::ofstream(lock) << "locked\n";
  log_path_ = dir / "events.jsonl";
  if (std::filesystem::exists(log_path_)) {
    std::ifstream in(log_path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ChangeEvent e = ChangeEvent::from_line(line);
      store_.apply(e);
      log_.push_back(e);
      next_seq_ = std::max(next_seq_, e.seq + 1);
    }
  }
  log_file_.open(log_path_, std::ios::app);
}

Engine::~Engine() {
  if (!log_path_.empty()) {
    std::error_code ec;
    std::filesystem::remove(log_path_.parent_path() / ".lock", ec);
  }
}

std::shared_ptr<const Store> Engine::snapshot() const {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  return std::make_shared<const Store>(store_);
}

// ---------------------------------------------------------------------------
// Transactions
// ---------------------------------------------------------------------------

void Engine::begin() {
  if (txn_backup_) return;  // already open; ops join it
  txn_backup_ = store_;
  txn_events_.clear();
  txn_created_shadows_.clear();
  txn_implicit_ = false;
}

Result<void> Engine::commit() {
  if (!txn_backup_) return make_error(Errc::NoTransaction, "no open transaction");
  for (ShadowId id : txn_created_shadows_) {
    if (store_.wids_on_shadow(id).empty()) {
      return make_error(Errc::UntaggedShadow,
                        "shadow " + std::to_string(id) +
                            " has no W-tag instance (W-tag Rule #3); attach one or abort");
    }
  }
  for (auto& e : txn_events_) {
    e.seq = next_seq_++;
    log_.push_back(e);
    append_to_sink(e);
  }
  txn_events_.clear();
  txn_created_shadows_.clear();
  txn_backup_.reset();
  txn_implicit_ = false;
  return {};
}

void Engine::abort() {
  if (!txn_backup_) return;
  store_ = std::move(*txn_backup_);
  txn_backup_.reset();
  txn_events_.clear();
  txn_created_shadows_.clear();
  txn_implicit_ = false;
}

void Engine::append_to_sink(const ChangeEvent& e) {
  if (log_file_.is_open()) {
    log_file_ << e.to_line() << '\n';
    log_file_.flush();
  }
}

void Engine::emit(const Ctx& ctx, std::string op, json payload) {
  ChangeEvent e;
  e.timestamp = now_iso8601();
  e.process = ctx.process;
  e.rule = ctx.rule;
  e.op = std::move(op);
  e.payload = std::move(payload);
  e.feed_source = ctx.feed_source;
  store_.apply(e);
  txn_events_.push_back(std::move(e));
}

Result<void> Engine::check_ctx(const Ctx& ctx) const {
  const ProcessRecord* proc = store_.process(ctx.process);
  if (!proc) {
    return make_error(Errc::UnregisteredProcess,
                      "process " + std::to_string(ctx.process) + " is not registered");
  }
  const bool known = std::any_of(proc->rules.begin(), proc->rules.end(),
                                 [&](const BusinessRule& r) { return r.id == ctx.rule; });
  if (!known) {
    return make_error(Errc::RuleUnknown, "rule " + std::to_string(ctx.rule) +
                                             " is not registered for process \"" + proc->name + "\"");
  }
  return {};
}

// Single-op convenience: ops outside an explicit transaction commit
// themselves, except shadow creation which must stay open for tagging.
#define SHADOW_AUTO_TXN()                      \
  const bool auto_commit_ = !txn_backup_.has_value(); \
  if (auto_commit_) begin();

#define SHADOW_AUTO_COMMIT()                              \
  if (auto_commit_) {                                     \
    if (auto c = commit(); !c) return c.error();          \
  }

// ---------------------------------------------------------------------------
// shadow_store ops
// ---------------------------------------------------------------------------

Result<ShadowId> Engine::insert_shadow(const Ctx& ctx, std::string value,
                                       std::vector<std::pair<std::string, std::string>> sub_parts) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  return insert_tree(ctx, std::move(value), std::move(sub_parts));
}

Result<ShadowId> Engine::insert_tree(const Ctx& ctx, std::string value,
                                     std::vector<std::pair<std::string, std::string>> sub_parts) {
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (!txn_backup_) {
    begin();
    txn_implicit_ = true;
  }
  const ShadowId id = store_.peek_shadow_id();
  json subs = json::array();
  ShadowId next = id + 1;
  for (auto& [role, payload] : sub_parts) {
    subs.push_back({{"role", role}, {"shadow_id", next}, {"value", payload}});
    txn_created_shadows_.insert(next);
    ++next;
  }
  txn_created_shadows_.insert(id);
  emit(ctx, "insert_shadow", {{"shadow_id", id}, {"value", std::move(value)}, {"subs", subs}});
  return id;
}

Result<ShadowId> Engine::create_composite(const Ctx& ctx, std::string value,
                                          std::vector<std::pair<std::string, ShadowId>> components) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  for (const auto& [role, cid] : components) {
    if (!store_.shadow(cid)) {
      return make_error(Errc::NotFound, "component shadow " + std::to_string(cid) + " not found");
    }
  }
  if (!txn_backup_) {
    begin();
    txn_implicit_ = true;
  }
  const ShadowId id = store_.peek_shadow_id();
  json comps = json::array();
  for (const auto& [role, cid] : components) comps.push_back({{"role", role}, {"child", cid}});
  txn_created_shadows_.insert(id);
  emit(ctx, "create_composite", {{"shadow_id", id}, {"value", std::move(value)}, {"components", comps}});
  return id;
}

Result<void> Engine::attach_component(const Ctx& ctx, ShadowId parent, std::string role,
                                      ShadowId child) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (!store_.shadow(parent)) return make_error(Errc::NotFound, "parent shadow not found");
  if (!store_.shadow(child)) return make_error(Errc::NotFound, "child shadow not found");
  SHADOW_AUTO_TXN();
  emit(ctx, "attach_component", {{"parent", parent}, {"role", std::move(role)}, {"child", child}});
  SHADOW_AUTO_COMMIT();
  return {};
}

Result<std::vector<ShadowId>> Engine::decompose_shadow(
    const Ctx& ctx, ShadowId parent, std::vector<std::pair<std::string, std::string>> parts) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (!store_.shadow(parent)) return make_error(Errc::NotFound, "shadow not found");
  if (!txn_backup_) {
    begin();
    txn_implicit_ = true;
  }
  json subs = json::array();
  ShadowId next = store_.peek_shadow_id();
  std::vector<ShadowId> created;
  for (auto& [role, payload] : parts) {
    subs.push_back({{"role", role}, {"shadow_id", next}, {"value", payload}});
    txn_created_shadows_.insert(next);
    created.push_back(next);
    ++next;
  }
  emit(ctx, "decompose_shadow", {{"parent", parent}, {"subs", subs}});
  return created;
}

Result<void> Engine::update_value(const Ctx& ctx, ShadowId id, std::string value) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  const Shadow* s = store_.shadow(id);
  if (!s || s->purged) return make_error(Errc::NotFound, "shadow not found");
  if (s->archived) {
    return make_error(Errc::InvalidArgument,
                      "shadow " + std::to_string(id) + " is archived; restore before updating");
  }
  SHADOW_AUTO_TXN();
  emit(ctx, "update_value", {{"shadow_id", id}, {"value", std::move(value)}});
  SHADOW_AUTO_COMMIT();
  return {};
}

Result<void> Engine::archive_values(const Ctx& ctx, ShadowId id) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  const Shadow* s = store_.shadow(id);
  if (!s || s->purged) return make_error(Errc::NotFound, "shadow not found");
  if (s->archived) return make_error(Errc::AlreadyArchived, "shadow already archived");
  SHADOW_AUTO_TXN();
  emit(ctx, "archive_values", {{"shadow_id", id}});
  SHADOW_AUTO_COMMIT();
  return {};
}

Result<void> Engine::restore_values(const Ctx& ctx, ShadowId id) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  const Shadow* s = store_.shadow(id);
  if (!s || s->purged) return make_error(Errc::NotFound, "shadow not found");
  if (!s->archived) return make_error(Errc::NothingToRestore, "shadow is not archived");
  SHADOW_AUTO_TXN();
  emit(ctx, "restore_values", {{"shadow_id", id}});
  SHADOW_AUTO_COMMIT();
  return {};
}

Result<void> Engine::purge_shadow(const Ctx& ctx, ShadowId id, bool confirmed) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (!confirmed) {
    return make_error(Errc::InvalidArgument, "physical purge requires explicit confirmation");
  }
  const Shadow* s = store_.shadow(id);
  if (!s || s->purged) return make_error(Errc::NotFound, "shadow not found");
  SHADOW_AUTO_TXN();
  emit(ctx, "purge_shadow", {{"shadow_id", id}});
  SHADOW_AUTO_COMMIT();
  return {};
}

// ---------------------------------------------------------------------------
// semantic_space ops
// ---------------------------------------------------------------------------

Result<ProcessId> Engine::register_process(const Ctx& ctx, std::string name,
                                           std::vector<std::string> rules) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (store_.process_by_name(name)) {
    return make_error(Errc::Conflict, "process \"" + name + "\" already registered");
  }
  const ProcessId id = store_.peek_process_id();
  json jrules = json::array();
  RuleId rid = 1;
  for (auto& text : rules) jrules.push_back({{"rule_id", rid++}, {"text", std::move(text)}});
  SHADOW_AUTO_TXN();
  emit(ctx, "register_process", {{"process_id", id}, {"name", std::move(name)}, {"rules", jrules}});
  SHADOW_AUTO_COMMIT();
  return id;
}

Result<PerspectiveId> Engine::create_perspective(const Ctx& ctx, std::string name,
                                                 std::string description) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (store_.perspective_by_name(name)) {
    return make_error(Errc::Conflict, "perspective \"" + name + "\" already exists");
  }
  const PerspectiveId id = store_.peek_perspective_id();
  SHADOW_AUTO_TXN();
  emit(ctx, "create_perspective",
       {{"perspective_id", id}, {"name", std::move(name)}, {"description", std::move(description)}});
  SHADOW_AUTO_COMMIT();
  return id;
}

Result<KindId> Engine::define_kind(const Ctx& ctx, PerspectiveId p, std::string name,
                                   std::string description, std::optional<TemplateDef> templ) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (!store_.perspective(p)) return make_error(Errc::NotFound, "perspective not found");
  if (store_.kind_by_name(p, name)) {
    return make_error(Errc::Conflict, "kind \"" + name + "\" already defined in perspective");
  }
  if (description.empty()) {
    return make_error(Errc::InvalidArgument, "kind description must be non-empty (W-tag Rule #1)");
  }
  const KindId id = store_.peek_kind_id();
  SHADOW_AUTO_TXN();
  emit(ctx, "define_kind",
       {{"kind_id", id}, {"perspective_id", p}, {"name", std::move(name)},
        {"description", std::move(description)}});
  if (templ) {
    // kNoId endpoints refer to the kind being defined.
    for (auto& e : templ->edges) {
      if (e.parent == kNoId) e.parent = id;
      if (e.child == kNoId) e.child = id;
    }
    if (auto r = set_template_unlocked(ctx, id, *templ); !r) {
      abort();
      return r.error();
    }
  }
  SHADOW_AUTO_COMMIT();
  return id;
}

Result<void> Engine::set_template(const Ctx& ctx, KindId kind, TemplateDef templ) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  SHADOW_AUTO_TXN();
  if (auto r = set_template_unlocked(ctx, kind, std::move(templ)); !r) {
    if (auto_commit_) abort();
    return r;
  }
  SHADOW_AUTO_COMMIT();
  return {};
}

Result<void> Engine::set_template_unlocked(const Ctx& ctx, KindId kind, TemplateDef templ) {
  const WTagKind* k = store_.kind(kind);
  if (!k) return make_error(Errc::NotFound, "kind not found");
  if (k->templ) {
    return make_error(Errc::Rule8Violation,
                      "kind \"" + k->name + "\" already has a decomposition template (W-tag Rule #8)");
  }
  // Template edges may name foreign kinds: a combine/join target structure is
  // declared over the W-tags it bridges. Property 2 applies at instance level.
  json edges = json::array();
  for (const auto& e : templ.edges) {
    const WTagKind* child = store_.kind(e.child);
    const WTagKind* parent = store_.kind(e.parent);
    if (!child || !parent) return make_error(Errc::NotFound, "template edge kind not found");
    edges.push_back({{"child", e.child}, {"parent", e.parent}, {"marker", marker_name(e.marker)}});
  }
  emit(ctx, "set_template", {{"kind_id", kind}, {"edges", edges}});
  // Mirror template edges into the relation table (kind level).
  for (const auto& e : templ.edges) {
    const RelationId rid = store_.peek_relation_id();
    emit(ctx, "assert_relation",
         {{"relation_id", rid},
          {"child", {{"level", "kind"}, {"id", e.child}}},
          {"parent", {{"level", "kind"}, {"id", e.parent}}},
          {"marker", marker_name(e.marker)},
          {"perspective_id", k->perspective}});
  }
  return {};
}

Result<PtagId> Engine::define_ptag(const Ctx& ctx, std::string name, FormatSpec format,
                                   KindId required_with_kind) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (store_.ptag_by_name(name)) {
    return make_error(Errc::Conflict, "P-tag \"" + name + "\" already defined");
  }
  if (required_with_kind != kNoId) {
    if (!store_.kind(required_with_kind)) return make_error(Errc::NotFound, "kind not found");
    if (store_.required_ptag_of_kind(required_with_kind)) {
      return make_error(Errc::Conflict, "kind already has a required P-tag");
    }
  }
  const PtagId id = store_.peek_ptag_id();
  json p;
  p["ptag_id"] = id;
  p["name"] = std::move(name);
  SHADOW_AUTO_TXN();
  json jf;
  switch (format.kind) {
    case FormatKind::Enumeration:
      jf = {{"kind", "enumeration"}, {"values", format.allowed}};
      break;
    case FormatKind::DatePattern:
      jf = {{"kind", "date"}, {"pattern", format.pattern}};
      break;
    case FormatKind::Segments: {
      json parts = json::array();
      for (const auto& s : format.segments.segments) {
        parts.push_back({{"cls", static_cast<int>(s.cls)}, {"len", s.len}});
      }
      jf = {{"kind", "segments"},
            {"separator", std::string(1, format.segments.separator)},
            {"parts", parts}};
      break;
    }
    case FormatKind::Token:
      jf = {{"kind", "token"},
            {"cls", static_cast<int>(format.token.cls)},
            {"min", format.token.min_len},
            {"max", format.token.max_len}};
      break;
  }
  p["format"] = jf;
  p["required_with_kind"] = required_with_kind;
  emit(ctx, "define_ptag", std::move(p));
  SHADOW_AUTO_COMMIT();
  return id;
}

Result<void> Engine::register_converter(const Ctx& ctx, PtagId from, PtagId to, std::string fn) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (!store_.ptag(from) || !store_.ptag(to)) return make_error(Errc::NotFound, "P-tag not found");
  if (!find_converter(fn)) {
    return make_error(Errc::NoConverter, "no converter routine named \"" + fn + "\"");
  }
  SHADOW_AUTO_TXN();
  emit(ctx, "register_converter", {{"from", from}, {"to", to}, {"fn", std::move(fn)}});
  SHADOW_AUTO_COMMIT();
  return {};
}

Result<Wid> Engine::attach_wtag(const Ctx& ctx, ShadowId shadow, KindId kind) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  const Shadow* s = store_.shadow(shadow);
  if (!s) return make_error(Errc::NotFound, "shadow not found");
  const WTagKind* k = store_.kind(kind);
  if (!k) return make_error(Errc::NotFound, "kind not found");
  if (auto req = store_.required_ptag_of_kind(kind)) {
    const PTag* t = store_.ptag(*req);
    if (!format_accepts(t->format, s->value)) {
      return make_error(Errc::FormatRejected, "value \"" + s->value +
                                                  "\" rejected by required P-tag \"" + t->name +
                                                  "\" (P-tag Rule #3)");
    }
  }
  const Wid wid = store_.peek_wid();
  SHADOW_AUTO_TXN();
  emit(ctx, "attach_wtag", {{"wid", wid}, {"kind_id", kind}, {"shadow_id", shadow}});
  SHADOW_AUTO_COMMIT();
  return wid;
}

Result<void> Engine::attach_ptag(const Ctx& ctx, ShadowId shadow, PtagId ptag) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  const Shadow* s = store_.shadow(shadow);
  if (!s) return make_error(Errc::NotFound, "shadow not found");
  const PTag* t = store_.ptag(ptag);
  if (!t) return make_error(Errc::NotFound, "P-tag not found");
  if (!format_accepts(t->format, s->value)) {
    return make_error(Errc::FormatRejected,
                      "value \"" + s->value + "\" rejected by P-tag \"" + t->name + "\"");
  }
  SHADOW_AUTO_TXN();
  emit(ctx, "attach_ptag", {{"shadow_id", shadow}, {"ptag_id", ptag}});
  SHADOW_AUTO_COMMIT();
  return {};
}

Result<std::string> Engine::convert(ShadowId shadow, PtagId to) const {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  const Shadow* s = store_.shadow(shadow);
  if (!s) return make_error(Errc::NotFound, "shadow not found");
  const PTag* target = store_.ptag(to);
  if (!target) return make_error(Errc::NotFound, "P-tag not found");

  // Stored format: last attached P-tag, else a kind-required P-tag.
  PtagId from = kNoId;
  const auto& attached = store_.ptags_on_shadow(shadow);
  if (!attached.empty()) {
    from = attached.back();
  } else {
    for (Wid wid : store_.wids_on_shadow(shadow)) {
      if (auto req = store_.required_ptag_of_kind(store_.instance(wid)->kind)) {
        from = *req;
        break;
      }
    }
  }
  if (from == to) return s->value;  // identity conversion
  if (from == kNoId) {
    return make_error(Errc::NoConverter, "shadow has no stored format to convert from");
  }
  auto fn_name = store_.converter_between(from, to);
  if (!fn_name) {
    return make_error(Errc::NoConverter, "no converter registered between P-tags " +
                                             std::to_string(from) + " and " + std::to_string(to));
  }
  ConverterFn fn = find_converter(*fn_name);
  if (!fn) return make_error(Errc::NoConverter, "converter routine missing: " + *fn_name);
  return fn(store_.ptag(from)->format, target->format, s->value);
}

Result<RelationId> Engine::assert_relation(const Ctx& ctx, RelEnd child, RelEnd parent,
                                           Marker marker, EtagId backing_etag) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (child.level != parent.level) {
    return make_error(Errc::InvalidArgument, "relation endpoints must be at one level");
  }

  auto end_perspective = [&](const RelEnd& e) -> PerspectiveId {
    if (e.level == RelEnd::Level::Kind) {
      const WTagKind* k = store_.kind(e.id);
      return k ? k->perspective : kNoId;
    }
    return store_.perspective_of_instance(e.id);
  };
  auto end_kind = [&](const RelEnd& e) -> KindId {
    if (e.level == RelEnd::Level::Kind) return e.id;
    const WTagInstance* i = store_.instance(e.id);
    return i ? i->kind : kNoId;
  };

  const PerspectiveId pc = end_perspective(child);
  const PerspectiveId pp = end_perspective(parent);
  if (pc == kNoId || pp == kNoId) return make_error(Errc::NotFound, "relation endpoint not found");
  if (pc != pp) {
    if (backing_etag == kNoId || !store_.etag(backing_etag)) {
      return make_error(Errc::UseEquivalenceLedger,
                        "inclusion across perspectives requires an E-tag (Property 2)");
    }
  } else {
    backing_etag = kNoId;
  }

  // Existing edge: idempotent on same marker, contradiction otherwise.
  for (RelationId rid : store_.relations_of_child(child)) {
    const SemanticRelation* r = store_.relation(rid);
    if (r->parent == parent) {
      if (r->marker == marker) return rid;
      return make_error(Errc::Conflict, "edge already exists with marker " +
                                            std::string(marker_name(r->marker)));
    }
  }

  // Instance edges must stay consistent with the parent kind's template.
  const KindId ck = end_kind(child);
  const KindId pk = end_kind(parent);
  if (child.level == RelEnd::Level::Instance) {
    const WTagKind* parent_kind = store_.kind(pk);
    if (parent_kind && parent_kind->templ && ck != pk) {
      const bool in_template =
          std::any_of(parent_kind->templ->edges.begin(), parent_kind->templ->edges.end(),
                      [&](const TemplateEdge& e) { return e.child == ck && e.parent == pk; });
      if (!in_template) {
        return make_error(Errc::Rule8Violation,
                          "instance edge is not part of the parent kind's single template");
      }
    }
  } else {
    const WTagKind* parent_kind = store_.kind(pk);
    if (parent_kind && parent_kind->templ) {
      const bool in_template =
          std::any_of(parent_kind->templ->edges.begin(), parent_kind->templ->edges.end(),
                      [&](const TemplateEdge& e) { return e.child == ck && e.parent == pk; });
      if (!in_template) {
        return make_error(Errc::Rule8Violation,
                          "kind already has a single declared template (W-tag Rule #8)");
      }
    }
  }

  const RelationId id = store_.peek_relation_id();
  SHADOW_AUTO_TXN();
  json payload = {{"relation_id", id},
                  {"child", {{"level", child.level == RelEnd::Level::Kind ? "kind" : "instance"},
                             {"id", child.id}}},
                  {"parent", {{"level", parent.level == RelEnd::Level::Kind ? "kind" : "instance"},
                              {"id", parent.id}}},
                  {"marker", marker_name(marker)},
                  {"perspective_id", pp}};
  if (backing_etag != kNoId) payload["backing_etag"] = backing_etag;
  emit(ctx, "assert_relation", std::move(payload));
  SHADOW_AUTO_COMMIT();
  return id;
}

Result<SchemaId> Engine::define_schema(const Ctx& ctx, PerspectiveId p, std::string name,
                                       std::string row_kind_name,
                                       std::vector<std::pair<std::string, PtagId>> columns,
                                       std::string key_column) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (!store_.perspective(p)) return make_error(Errc::NotFound, "perspective not found");
  if (store_.schema_by_name(name)) {
    return make_error(Errc::Conflict, "schema \"" + name + "\" already defined");
  }
  if (!key_column.empty()) {
    const bool found = std::any_of(columns.begin(), columns.end(),
                                   [&](const auto& c) { return c.first == key_column; });
    if (!found) return make_error(Errc::InvalidArgument, "key column not in column list");
  }
  for (const auto& [cname, ptag] : columns) {
    if (!store_.ptag(ptag)) {
      return make_error(Errc::NotFound, "P-tag for column \"" + cname + "\" not found");
    }
  }

  const bool outer = !txn_backup_.has_value();
  if (outer) begin();

  auto fail = [&](Error e) -> Result<SchemaId> {
    if (outer) abort();
    return e;
  };

  const KindId row_kind = store_.peek_kind_id();
  if (store_.kind_by_name(p, row_kind_name)) {
    return fail(make_error(Errc::Conflict, "kind \"" + row_kind_name + "\" already defined"));
  }
  emit(ctx, "define_kind",
       {{"kind_id", row_kind}, {"perspective_id", p}, {"name", row_kind_name},
        {"description", "simulated schema \"" + name + "\" (one row per shadow)"}});

  json jcols = json::array();
  KindId key_kind = kNoId;
  TemplateDef templ;
  for (const auto& [cname, ptag] : columns) {
    KindId col_kind;
    if (auto existing = store_.kind_by_name(p, cname)) {
      col_kind = *existing;
    } else {
      col_kind = store_.peek_kind_id();
      emit(ctx, "define_kind",
           {{"kind_id", col_kind}, {"perspective_id", p}, {"name", cname},
            {"description", "column of simulated schema \"" + name + "\""}});
    }
    jcols.push_back({{"kind", col_kind}, {"ptag", ptag}});
    templ.edges.push_back({col_kind, row_kind, Marker::Unmarked});
    if (cname == key_column) key_kind = col_kind;
  }
  if (auto r = set_template_unlocked(ctx, row_kind, templ); !r) return fail(r.error());

  const SchemaId id = store_.peek_schema_id();
  emit(ctx, "define_schema",
       {{"schema_id", id}, {"perspective_id", p}, {"name", std::move(name)},
        {"row_kind", row_kind}, {"columns", jcols}, {"key_kind", key_kind}});

  if (outer) {
    if (auto c = commit(); !c) return fail(c.error());
  }
  return id;
}

Result<ShadowId> Engine::load_row(const Ctx& ctx,
                                  SchemaId schema,
                                  const std::vector<std::pair<std::string, std::string>>& values,
                                  std::string feed_key) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  const SimulatedSchema* sch = store_.schema(schema);
  if (!sch) return make_error(Errc::NotFound, "schema not found");

  struct Cell {
    KindId kind;
    PtagId ptag;
    std::string name;
    std::string value;
  };
  std::vector<Cell> cells;
  for (const auto& [name, value] : values) {
    const WTagKind* ck = nullptr;
    PtagId ptag = kNoId;
    for (const auto& col : sch->columns) {
      const WTagKind* k = store_.kind(col.kind);
      if (k && k->name == name) {
        ck = k;
        ptag = col.ptag;
        break;
      }
    }
    if (!ck) {
      return make_error(Errc::InvalidArgument,
                        "schema \"" + sch->name + "\" has no column \"" + name + "\"");
    }
    const PTag* t = store_.ptag(ptag);
    if (!format_accepts(t->format, value)) {
      return make_error(Errc::FormatRejected, "value \"" + value + "\" for column \"" + name +
                                                  "\" rejected by P-tag \"" + t->name + "\"");
    }
    cells.push_back({ck->id, ptag, name, value});
  }
  // Present cells keep the schema's column order.
  std::stable_sort(cells.begin(), cells.end(), [&](const Cell& a, const Cell& b) {
    auto pos = [&](KindId kind) {
      for (std::size_t i = 0; i < sch->columns.size(); ++i) {
        if (sch->columns[i].kind == kind) return i;
      }
      return sch->columns.size();
    };
    return pos(a.kind) < pos(b.kind);
  });

  const bool outer = !txn_backup_.has_value();
  if (outer) begin();
  auto fail = [&](Error e) -> Result<ShadowId> {
    if (outer) abort();
    return e;
  };

  // Row shadow; one tagged sub-shadow per present column (absent = null).
  const ShadowId row = store_.peek_shadow_id();
  json subs = json::array();
  {
    ShadowId next = row + 1;
    for (const auto& c : cells) {
      subs.push_back({{"role", c.name}, {"shadow_id", next}, {"value", c.value}});
      txn_created_shadows_.insert(next);
      ++next;
    }
  }
  txn_created_shadows_.insert(row);
  emit(ctx, "insert_shadow", {{"shadow_id", row}, {"value", ""}, {"subs", subs}});

  const Wid row_wid = store_.peek_wid();
  emit(ctx, "attach_wtag", {{"wid", row_wid}, {"kind_id", sch->row_kind}, {"shadow_id", row}});

  Wid key_wid = kNoId;
  ShadowId sub = row + 1;
  for (const auto& c : cells) {
    const Wid col_wid = store_.peek_wid();
    emit(ctx, "attach_wtag", {{"wid", col_wid}, {"kind_id", c.kind}, {"shadow_id", sub}});
    const RelationId rel = store_.peek_relation_id();
    emit(ctx, "assert_relation",
         {{"relation_id", rel},
          {"child", {{"level", "instance"}, {"id", col_wid}}},
          {"parent", {{"level", "instance"}, {"id", row_wid}}},
          {"marker", "unmarked"},
          {"perspective_id", sch->perspective}});
    if (c.kind == sch->key_kind) key_wid = col_wid;
    ++sub;
  }

  // The unique-key column strongly identifies the row (primary-key reading).
  if (key_wid != kNoId) {
    const EtagId etag = store_.peek_etag_id();
    json evidence = json::array();
    evidence.push_back({{"author", ctx.process},
                        {"timestamp", now_iso8601()},
                        {"kind", static_cast<int>(EvidenceRecord::Kind::RuleDerived)},
                        {"body", "unique key column of simulated schema \"" + sch->name + "\""},
                        {"external_ref", ""}});
    emit(ctx, "assert_etag",
         {{"etag_id", etag}, {"a", key_wid}, {"b", row_wid}, {"kind", "strong"},
          {"evidence", evidence}});
  }

  if (!feed_key.empty()) {
    emit(ctx, "note_feed_key", {{"schema_id", schema}, {"key", feed_key}, {"shadow_id", row}});
  }

  if (outer) {
    if (auto c = commit(); !c) return fail(c.error());
  }
  return row;
}

// ---------------------------------------------------------------------------
// equivalence ledger ops
// ---------------------------------------------------------------------------

Result<EtagId> Engine::assert_etag(const Ctx& ctx, Wid a, Wid b, EtagKind kind,
                                   std::vector<EvidenceRecord> evidence) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  if (a == b) return make_error(Errc::SelfEquivalence, "an E-tag needs two distinct WIDs");
  if (!store_.instance(a) || !store_.instance(b)) {
    return make_error(Errc::NotFound, "WID not found");
  }
  if (evidence.empty()) {
    return make_error(Errc::EvidenceRequired, "E-tags require supporting evidence (Principle 4)");
  }
  json jev = json::array();
  for (auto& ev : evidence) {
    if (ev.author == kNoId) ev.author = ctx.process;
    if (!store_.process(ev.author)) {
      return make_error(Errc::UnregisteredProcess, "evidence author process not registered");
    }
    if (ev.timestamp.empty()) ev.timestamp = now_iso8601();
    jev.push_back({{"author", ev.author},
                   {"timestamp", ev.timestamp},
                   {"kind", static_cast<int>(ev.kind)},
                   {"body", ev.body},
                   {"external_ref", ev.external_ref}});
  }
  const EtagId id = store_.peek_etag_id();
  SHADOW_AUTO_TXN();
  emit(ctx, "assert_etag",
       {{"etag_id", id}, {"a", a}, {"b", b},
        {"kind", kind == EtagKind::Strong ? "strong" : "weak"}, {"evidence", jev}});
  SHADOW_AUTO_COMMIT();
  return id;
}

Result<EtagId> Engine::synchronize(const Ctx& ctx, Wid a, Wid b) {
  {
    std::lock_guard<std::mutex> guard(writer_mutex_);
    const WTagInstance* ia = store_.instance(a);
    const WTagInstance* ib = store_.instance(b);
    if (!ia || !ib) return make_error(Errc::NotFound, "WID not found");
    if (ia->shadow == kNoId || ia->shadow != ib->shadow) {
      return make_error(Errc::NotSameShadow,
                        "synchronization points bridge two W-tags on one shadow");
    }
  }
  EvidenceRecord ev;
  ev.kind = EvidenceRecord::Kind::SynchronizationPoint;
  ev.body = "W-tags #" + std::to_string(a) + " and #" + std::to_string(b) +
            " are attached to the same shadow";
  return assert_etag(ctx, a, b, EtagKind::Strong, {ev});
}

Result<EtagId> Engine::promote(const Ctx& ctx, Wid a, Wid b) {
  std::optional<EtagId> ab, ba;
  {
    std::lock_guard<std::mutex> guard(writer_mutex_);
    ab = store_.weak_link(a, b);
    ba = store_.weak_link(b, a);
  }
  if (!ab || !ba) {
    return make_error(Errc::InvalidArgument,
                      "promotion needs mutual active weak E-tags in both directions (Property 5)");
  }
  EvidenceRecord ev;
  ev.kind = EvidenceRecord::Kind::RuleDerived;
  ev.body = "promoted from mutual weak E-tags #" + std::to_string(*ab) + " and #" +
            std::to_string(*ba);
  return assert_etag(ctx, a, b, EtagKind::Strong, {ev});
}

Result<void> Engine::revoke_etag(const Ctx& ctx, EtagId id, std::string reason) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  const ETag* e = store_.etag(id);
  if (!e) return make_error(Errc::NotFound, "E-tag not found");
  if (e->revoked) return make_error(Errc::AlreadyRevoked, "E-tag already revoked");
  SHADOW_AUTO_TXN();
  emit(ctx, "revoke_etag", {{"etag_id", id}, {"reason", std::move(reason)}});
  SHADOW_AUTO_COMMIT();
  return {};
}

Result<Wid> Engine::materialize_derived(const Ctx& ctx, KindId kind, const Derivation& d) {
  std::lock_guard<std::mutex> guard(writer_mutex_);
  if (auto c = check_ctx(ctx); !c) return c.error();
  const std::string key = derivation_key(d);
  if (auto existing = store_.derived_by_key(key)) return *existing;  // allocated once
  if (!store_.kind(kind)) return make_error(Errc::NotFound, "kind not found");
  if (!store_.instance(d.base)) return make_error(Errc::NotFound, "base WID not found");

  json shifts = json::array();
  for (const auto& s : d.shifts) {
    json path = json::array();
    for (const auto& st : s.path) {
      path.push_back({{"via", st.via == ProofStep::Via::Relation ? "relation" : "etag"},
                      {"id", st.id},
                      {"from", st.from},
                      {"to", st.to}});
    }
    shifts.push_back({{"original", s.original},
                      {"shifted_to", s.shifted_to},
                      {"direction",
                       s.direction == ComponentShift::Direction::Upward ? "upward" : "downward"},
                      {"path", path}});
  }
  const Wid wid = store_.peek_wid();
  SHADOW_AUTO_TXN();
  emit(ctx, "attach_derived",
       {{"wid", wid}, {"kind_id", kind}, {"base", d.base}, {"shifts", shifts}, {"key", key}});
  SHADOW_AUTO_COMMIT();
  return wid;
}

}  // namespace shadow
