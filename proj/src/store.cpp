#include "shadow/store.hpp"

#include <algorithm>

namespace shadow {

using nlohmann::json;

namespace {

json format_to_json(const FormatSpec& f) {
  json j;
  switch (f.kind) {
    case FormatKind::Enumeration:
      j["kind"] = "enumeration";
      j["values"] = f.allowed;
      break;
    case FormatKind::DatePattern:
      j["kind"] = "date";
      j["pattern"] = f.pattern;
      break;
    case FormatKind::Segments: {
      j["kind"] = "segments";
      j["separator"] = std::string(1, f.segments.separator);
      json parts = json::array();
      for (const auto& s : f.segments.segments) {
        parts.push_back({{"cls", static_cast<int>(s.cls)}, {"len", s.len}});
      }
      j["parts"] = parts;
      break;
    }
    case FormatKind::Token:
      j["kind"] = "token";
      j["cls"] = static_cast<int>(f.token.cls);
      j["min"] = f.token.min_len;
      j["max"] = f.token.max_len;
      break;
  }
  return j;
}

FormatSpec format_from_json(const json& j) {
  FormatSpec f;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "enumeration") {
    f.kind = FormatKind::Enumeration;
    f.allowed = j.at("values").get<std::vector<std::string>>();
  } else if (kind == "date") {
    f.kind = FormatKind::DatePattern;
    f.pattern = j.at("pattern").get<std::string>();
  } else if (kind == "segments") {
    f.kind = FormatKind::Segments;
    f.segments.separator = j.at("separator").get<std::string>().at(0);
    for (const auto& p : j.at("parts")) {
      f.segments.segments.push_back(
          {static_cast<TokenClass>(p.at("cls").get<int>()), p.at("len").get<std::size_t>()});
    }
  } else {
    f.kind = FormatKind::Token;
    f.token.cls = static_cast<TokenClass>(j.at("cls").get<int>());
    f.token.min_len = j.at("min").get<std::size_t>();
    f.token.max_len = j.at("max").get<std::size_t>();
  }
  return f;
}

json rel_end_to_json(const RelEnd& e) {
  return {{"level", e.level == RelEnd::Level::Kind ? "kind" : "instance"}, {"id", e.id}};
}

RelEnd rel_end_from_json(const json& j) {
  RelEnd e;
  e.level = j.at("level").get<std::string>() == "kind" ? RelEnd::Level::Kind
                                                       : RelEnd::Level::Instance;
  e.id = j.at("id").get<std::uint64_t>();
  return e;
}

json evidence_to_json(const EvidenceRecord& ev) {
  return {{"author", ev.author},
          {"timestamp", ev.timestamp},
          {"kind", static_cast<int>(ev.kind)},
          {"body", ev.body},
          {"external_ref", ev.external_ref}};
}

EvidenceRecord evidence_from_json(const json& j) {
  EvidenceRecord ev;
  ev.author = j.at("author").get<ProcessId>();
  ev.timestamp = j.at("timestamp").get<std::string>();
  ev.kind = static_cast<EvidenceRecord::Kind>(j.at("kind").get<int>());
  ev.body = j.at("body").get<std::string>();
  ev.external_ref = j.at("external_ref").get<std::string>();
  return ev;
}

json proof_step_to_json(const ProofStep& s) {
  return {{"via", s.via == ProofStep::Via::Relation ? "relation" : "etag"},
          {"id", s.id},
          {"from", s.from},
          {"to", s.to}};
}

ProofStep proof_step_from_json(const json& j) {
  ProofStep s;
  s.via = j.at("via").get<std::string>() == "relation" ? ProofStep::Via::Relation
                                                       : ProofStep::Via::Etag;
  s.id = j.at("id").get<std::uint64_t>();
  s.from = j.at("from").get<Wid>();
  s.to = j.at("to").get<Wid>();
  return s;
}

template <typename T>
void bump(T& counter, T used) {
  counter = std::max(counter, used + 1);
}

// Levenshtein distance, used only for NameError near-match hints.
std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const std::vector<Wid> kEmptyWids;
const std::vector<RelationId> kEmptyRels;
const std::vector<EtagId> kEmptyEtags;
const std::vector<PtagId> kEmptyPtags;

}  // namespace

Store::Store() {
  // Built-in bootstrap process so that register_process events themselves
  // carry a registered process_id.
  ProcessRecord system;
  system.id = 1;
  system.name = "system";
  system.rules.push_back({1, "system bootstrap"});
  processes_[system.id] = system;
  next_process_ = 2;
}

void Store::apply(const ChangeEvent& event) {
  const json& p = event.payload;
  if (event.op == "register_process") return apply_register_process(p);
  if (event.op == "create_perspective") return apply_create_perspective(p);
  if (event.op == "define_kind") return apply_define_kind(p);
  if (event.op == "set_template") return apply_set_template(p);
  if (event.op == "define_ptag") return apply_define_ptag(p);
  if (event.op == "register_converter") return apply_register_converter(p);
  if (event.op == "insert_shadow" || event.op == "decompose_shadow") return apply_insert_shadow(p);
  if (event.op == "create_composite") return apply_create_composite(p);
  if (event.op == "attach_component") return apply_attach_component(p);
  if (event.op == "update_value") return apply_update_value(p);
  if (event.op == "archive_values") return apply_archive_values(p);
  if (event.op == "restore_values") return apply_restore_values(p);
  if (event.op == "purge_shadow") return apply_purge_shadow(p);
  if (event.op == "attach_wtag") return apply_attach_wtag(p);
  if (event.op == "attach_derived") return apply_attach_derived(p);
  if (event.op == "attach_ptag") return apply_attach_ptag(p);
  if (event.op == "assert_relation") return apply_assert_relation(p);
  if (event.op == "define_schema") return apply_define_schema(p);
  if (event.op == "note_feed_key") return apply_note_feed_key(p);
  if (event.op == "assert_etag") return apply_assert_etag(p);
  if (event.op == "revoke_etag") return apply_revoke_etag(p);
}

void Store::apply_register_process(const json& p) {
  ProcessRecord rec;
  rec.id = p.at("process_id").get<ProcessId>();
  rec.name = p.at("name").get<std::string>();
  for (const auto& r : p.at("rules")) {
    rec.rules.push_back({r.at("rule_id").get<RuleId>(), r.at("text").get<std::string>()});
  }
  processes_[rec.id] = rec;
  bump(next_process_, rec.id);
}

void Store::apply_create_perspective(const json& p) {
  Perspective per;
  per.id = p.at("perspective_id").get<PerspectiveId>();
  per.name = p.at("name").get<std::string>();
  per.description = p.at("description").get<std::string>();
  perspectives_[per.id] = per;
  bump(next_perspective_, per.id);
}

void Store::apply_define_kind(const json& p) {
  WTagKind k;
  k.id = p.at("kind_id").get<KindId>();
  k.perspective = p.at("perspective_id").get<PerspectiveId>();
  k.name = p.at("name").get<std::string>();
  k.description = p.at("description").get<std::string>();
  kinds_[k.id] = k;
  bump(next_kind_, k.id);
}

void Store::apply_set_template(const json& p) {
  auto& k = kinds_.at(p.at("kind_id").get<KindId>());
  TemplateDef t;
  for (const auto& e : p.at("edges")) {
    TemplateEdge edge;
    edge.child = e.at("child").get<KindId>();
    edge.parent = e.at("parent").get<KindId>();
    edge.marker = *marker_from_name(e.at("marker").get<std::string>());
    t.edges.push_back(edge);
  }
  k.templ = std::move(t);
}

void Store::apply_define_ptag(const json& p) {
  PTag t;
  t.id = p.at("ptag_id").get<PtagId>();
  t.name = p.at("name").get<std::string>();
  t.format = format_from_json(p.at("format"));
  t.required_with_kind = p.at("required_with_kind").get<KindId>();
  ptags_[t.id] = t;
  bump(next_ptag_, t.id);
}

void Store::apply_register_converter(const json& p) {
  converters_[{p.at("from").get<PtagId>(), p.at("to").get<PtagId>()}] =
      p.at("fn").get<std::string>();
}

void Store::apply_insert_shadow(const json& p) {
  // insert_shadow: {shadow_id?, value?, parent?, subs:[{role, shadow_id, value}]}
  if (p.contains("shadow_id")) {
    Shadow s;
    s.id = p.at("shadow_id").get<ShadowId>();
    s.value = p.at("value").get<std::string>();
    shadows_[s.id] = s;
    bump(next_shadow_, s.id);
  }
  const ShadowId parent =
      p.contains("parent") ? p.at("parent").get<ShadowId>() : p.at("shadow_id").get<ShadowId>();
  if (p.contains("subs")) {
    for (const auto& sub : p.at("subs")) {
      Shadow s;
      s.id = sub.at("shadow_id").get<ShadowId>();
      s.value = sub.at("value").get<std::string>();
      shadows_[s.id] = s;
      bump(next_shadow_, s.id);
      shadows_.at(parent).subs.emplace_back(sub.at("role").get<std::string>(), s.id);
    }
  }
}

void Store::apply_create_composite(const json& p) {
  Shadow s;
  s.id = p.at("shadow_id").get<ShadowId>();
  s.value = p.at("value").get<std::string>();
  for (const auto& c : p.at("components")) {
    s.subs.emplace_back(c.at("role").get<std::string>(), c.at("child").get<ShadowId>());
  }
  shadows_[s.id] = s;
  bump(next_shadow_, s.id);
}

void Store::apply_attach_component(const json& p) {
  shadows_.at(p.at("parent").get<ShadowId>())
      .subs.emplace_back(p.at("role").get<std::string>(), p.at("child").get<ShadowId>());
}

void Store::apply_update_value(const json& p) {
  shadows_.at(p.at("shadow_id").get<ShadowId>()).value = p.at("value").get<std::string>();
}

void Store::apply_archive_values(const json& p) {
  auto& s = shadows_.at(p.at("shadow_id").get<ShadowId>());
  s.archive_value = s.value;
  s.value.clear();
  s.archived = true;
}

void Store::apply_restore_values(const json& p) {
  auto& s = shadows_.at(p.at("shadow_id").get<ShadowId>());
  s.value = s.archive_value.value_or("");
  s.archive_value.reset();
  s.archived = false;
}

void Store::apply_purge_shadow(const json& p) {
  auto& s = shadows_.at(p.at("shadow_id").get<ShadowId>());
  s.value.clear();
  s.archive_value.reset();
  s.archived = false;
  s.purged = true;
}

void Store::apply_attach_wtag(const json& p) {
  WTagInstance inst;
  inst.wid = p.at("wid").get<Wid>();
  inst.kind = p.at("kind_id").get<KindId>();
  inst.shadow = p.at("shadow_id").get<ShadowId>();
  instances_[inst.wid] = inst;
  bump(next_wid_, inst.wid);
  index_instance(inst);
}

void Store::apply_attach_derived(const json& p) {
  WTagInstance inst;
  inst.wid = p.at("wid").get<Wid>();
  inst.kind = p.at("kind_id").get<KindId>();
  inst.shadow = kNoId;
  inst.derived = true;
  Derivation d;
  d.base = p.at("base").get<Wid>();
  for (const auto& s : p.at("shifts")) {
    ComponentShift shift;
    shift.original = s.at("original").get<Wid>();
    shift.shifted_to = s.at("shifted_to").get<Wid>();
    shift.direction = s.at("direction").get<std::string>() == "upward"
                          ? ComponentShift::Direction::Upward
                          : ComponentShift::Direction::Downward;
    for (const auto& st : s.at("path")) shift.path.push_back(proof_step_from_json(st));
    d.shifts.push_back(std::move(shift));
  }
  inst.derivation = std::move(d);
  instances_[inst.wid] = inst;
  bump(next_wid_, inst.wid);
  index_instance(inst);
}

void Store::apply_attach_ptag(const json& p) {
  shadow_ptags_[p.at("shadow_id").get<ShadowId>()].push_back(p.at("ptag_id").get<PtagId>());
}

void Store::apply_assert_relation(const json& p) {
  SemanticRelation rel;
  rel.id = p.at("relation_id").get<RelationId>();
  rel.child = rel_end_from_json(p.at("child"));
  rel.parent = rel_end_from_json(p.at("parent"));
  rel.marker = *marker_from_name(p.at("marker").get<std::string>());
  rel.perspective = p.at("perspective_id").get<PerspectiveId>();
  if (p.contains("backing_etag")) rel.backing_etag = p.at("backing_etag").get<EtagId>();
  relations_[rel.id] = rel;
  bump(next_relation_, rel.id);
  index_relation(rel);
}

void Store::apply_define_schema(const json& p) {
  SimulatedSchema s;
  s.id = p.at("schema_id").get<SchemaId>();
  s.perspective = p.at("perspective_id").get<PerspectiveId>();
  s.name = p.at("name").get<std::string>();
  s.row_kind = p.at("row_kind").get<KindId>();
  for (const auto& c : p.at("columns")) {
    s.columns.push_back({c.at("kind").get<KindId>(), c.at("ptag").get<PtagId>()});
  }
  s.key_kind = p.at("key_kind").get<KindId>();
  schemas_[s.id] = s;
  bump(next_schema_, s.id);
}

void Store::apply_note_feed_key(const json& p) {
  feed_rows_[p.at("schema_id").get<SchemaId>()][p.at("key").get<std::string>()].push_back(
      p.at("shadow_id").get<ShadowId>());
}

void Store::apply_assert_etag(const json& p) {
  ETag e;
  e.id = p.at("etag_id").get<EtagId>();
  e.a = p.at("a").get<Wid>();
  e.b = p.at("b").get<Wid>();
  e.kind = p.at("kind").get<std::string>() == "strong" ? EtagKind::Strong : EtagKind::Weak;
  for (const auto& ev : p.at("evidence")) e.evidence.push_back(evidence_from_json(ev));
  etags_[e.id] = e;
  bump(next_etag_, e.id);
  index_etag(e);
}

void Store::apply_revoke_etag(const json& p) {
  auto& e = etags_.at(p.at("etag_id").get<EtagId>());
  e.revoked = true;
  e.revocation_reason = p.at("reason").get<std::string>();
}

void Store::index_instance(const WTagInstance& inst) {
  kind_instances_[inst.kind].push_back(inst.wid);
  if (inst.shadow != kNoId) shadow_wids_[inst.shadow].push_back(inst.wid);
  if (inst.derivation) derivation_index_[derivation_key(*inst.derivation)] = inst.wid;
}

void Store::index_relation(const SemanticRelation& rel) {
  const int cl = rel.child.level == RelEnd::Level::Kind ? 0 : 1;
  const int pl = rel.parent.level == RelEnd::Level::Kind ? 0 : 1;
  child_rels_[{cl, rel.child.id}].push_back(rel.id);
  parent_rels_[{pl, rel.parent.id}].push_back(rel.id);
}

void Store::index_etag(const ETag& etag) {
  wid_etags_[etag.a].push_back(etag.id);
  wid_etags_[etag.b].push_back(etag.id);
}

// ---------------------------------------------------------------------------
// Lookups
// ---------------------------------------------------------------------------

const Shadow* Store::shadow(ShadowId id) const {
  auto it = shadows_.find(id);
  return it == shadows_.end() ? nullptr : &it->second;
}

std::vector<ShadowId> Store::shadow_ids() const {
  std::vector<ShadowId> out;
  out.reserve(shadows_.size());
  for (const auto& [id, _] : shadows_) out.push_back(id);
  return out;
}

const Perspective* Store::perspective(PerspectiveId id) const {
  auto it = perspectives_.find(id);
  return it == perspectives_.end() ? nullptr : &it->second;
}

const WTagKind* Store::kind(KindId id) const {
  auto it = kinds_.find(id);
  return it == kinds_.end() ? nullptr : &it->second;
}

const WTagInstance* Store::instance(Wid wid) const {
  auto it = instances_.find(wid);
  return it == instances_.end() ? nullptr : &it->second;
}

const SemanticRelation* Store::relation(RelationId id) const {
  auto it = relations_.find(id);
  return it == relations_.end() ? nullptr : &it->second;
}

const PTag* Store::ptag(PtagId id) const {
  auto it = ptags_.find(id);
  return it == ptags_.end() ? nullptr : &it->second;
}

const ETag* Store::etag(EtagId id) const {
  auto it = etags_.find(id);
  return it == etags_.end() ? nullptr : &it->second;
}

const SimulatedSchema* Store::schema(SchemaId id) const {
  auto it = schemas_.find(id);
  return it == schemas_.end() ? nullptr : &it->second;
}

const ProcessRecord* Store::process(ProcessId id) const {
  auto it = processes_.find(id);
  return it == processes_.end() ? nullptr : &it->second;
}

std::optional<PerspectiveId> Store::perspective_by_name(std::string_view name) const {
  for (const auto& [id, p] : perspectives_) {
    if (p.name == name) return id;
  }
  return std::nullopt;
}

std::optional<KindId> Store::kind_by_name(PerspectiveId p, std::string_view name) const {
  for (const auto& [id, k] : kinds_) {
    if (k.perspective == p && k.name == name) return id;
  }
  return std::nullopt;
}

std::optional<KindId> Store::kind_by_qualified(std::string_view qualified) const {
  const auto colon = qualified.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto p = perspective_by_name(qualified.substr(0, colon));
  if (!p) return std::nullopt;
  return kind_by_name(*p, qualified.substr(colon + 1));
}

std::string Store::qualified_kind_name(KindId id) const {
  const WTagKind* k = kind(id);
  if (!k) return "?";
  const Perspective* p = perspective(k->perspective);
  return (p ? p->name : "?") + ":" + k->name;
}

std::optional<PtagId> Store::ptag_by_name(std::string_view name) const {
  for (const auto& [id, t] : ptags_) {
    if (t.name == name) return id;
  }
  return std::nullopt;
}

std::optional<SchemaId> Store::schema_by_name(std::string_view name) const {
  for (const auto& [id, s] : schemas_) {
    if (s.name == name) return id;
  }
  return std::nullopt;
}

std::optional<ProcessId> Store::process_by_name(std::string_view name) const {
  for (const auto& [id, p] : processes_) {
    if (p.name == name) return id;
  }
  return std::nullopt;
}

std::vector<std::string> Store::kind_name_candidates(std::string_view qualified,
                                                     std::size_t max) const {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& [id, k] : kinds_) {
    const std::string name = qualified_kind_name(id);
    scored.emplace_back(edit_distance(qualified, name), name);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (const auto& [d, name] : scored) {
    if (out.size() >= max || d > qualified.size()) break;
    out.push_back(name);
  }
  return out;
}

const std::vector<Wid>& Store::instances_of_kind(KindId id) const {
  auto it = kind_instances_.find(id);
  return it == kind_instances_.end() ? kEmptyWids : it->second;
}

const std::vector<Wid>& Store::wids_on_shadow(ShadowId id) const {
  auto it = shadow_wids_.find(id);
  return it == shadow_wids_.end() ? kEmptyWids : it->second;
}

const std::vector<RelationId>& Store::relations_of_child(const RelEnd& e) const {
  auto it = child_rels_.find({e.level == RelEnd::Level::Kind ? 0 : 1, e.id});
  return it == child_rels_.end() ? kEmptyRels : it->second;
}

const std::vector<RelationId>& Store::relations_of_parent(const RelEnd& e) const {
  auto it = parent_rels_.find({e.level == RelEnd::Level::Kind ? 0 : 1, e.id});
  return it == parent_rels_.end() ? kEmptyRels : it->second;
}

const std::vector<EtagId>& Store::etags_of(Wid wid) const {
  auto it = wid_etags_.find(wid);
  return it == wid_etags_.end() ? kEmptyEtags : it->second;
}

const std::vector<PtagId>& Store::ptags_on_shadow(ShadowId id) const {
  auto it = shadow_ptags_.find(id);
  return it == shadow_ptags_.end() ? kEmptyPtags : it->second;
}

std::optional<Wid> Store::derived_by_key(const std::string& key) const {
  auto it = derivation_index_.find(key);
  if (it == derivation_index_.end()) return std::nullopt;
  return it->second;
}

PerspectiveId Store::perspective_of_instance(Wid wid) const {
  const WTagInstance* inst = instance(wid);
  if (!inst) return kNoId;
  const WTagKind* k = kind(inst->kind);
  return k ? k->perspective : kNoId;
}

std::optional<PtagId> Store::required_ptag_of_kind(KindId id) const {
  for (const auto& [pid, t] : ptags_) {
    if (t.required_with_kind == id) return pid;
  }
  return std::nullopt;
}

std::optional<std::string> Store::converter_between(PtagId from, PtagId to) const {
  auto it = converters_.find({from, to});
  if (it == converters_.end()) return std::nullopt;
  return it->second;
}

const std::vector<ShadowId>* Store::feed_rows(SchemaId schema, const std::string& key) const {
  auto it = feed_rows_.find(schema);
  if (it == feed_rows_.end()) return nullptr;
  auto kit = it->second.find(key);
  return kit == it->second.end() ? nullptr : &kit->second;
}

std::optional<EtagId> Store::strong_link(Wid a, Wid b) const {
  for (EtagId id : etags_of(a)) {
    const ETag& e = etags_.at(id);
    if (e.revoked || e.kind != EtagKind::Strong) continue;
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return id;
  }
  return std::nullopt;
}

std::optional<EtagId> Store::weak_link(Wid a, Wid b) const {
  for (EtagId id : etags_of(a)) {
    const ETag& e = etags_.at(id);
    if (e.revoked || e.kind != EtagKind::Weak) continue;
    if (e.a == a && e.b == b) return id;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string Store::serialize() const {
  json root;

  json shadows = json::array();
  for (const auto& [id, s] : shadows_) {
    json subs = json::array();
    for (const auto& [role, sid] : s.subs) subs.push_back({{"role", role}, {"shadow", sid}});
    json row = {{"id", id},     {"value", s.value},   {"subs", subs},
                {"archived", s.archived}, {"purged", s.purged}};
    if (s.archive_value) row["archive_value"] = *s.archive_value;
    shadows.push_back(row);
  }
  root["shadows"] = shadows;

  json perspectives = json::array();
  for (const auto& [id, p] : perspectives_) {
    perspectives.push_back({{"id", id}, {"name", p.name}, {"description", p.description}});
  }
  root["perspectives"] = perspectives;

  json kinds = json::array();
  for (const auto& [id, k] : kinds_) {
    json row = {{"id", id},
                {"perspective", k.perspective},
                {"name", k.name},
                {"description", k.description}};
    if (k.templ) {
      json edges = json::array();
      for (const auto& e : k.templ->edges) {
        edges.push_back({{"child", e.child}, {"parent", e.parent}, {"marker", marker_name(e.marker)}});
      }
      row["template"] = edges;
    }
    kinds.push_back(row);
  }
  root["kinds"] = kinds;

  json instances = json::array();
  for (const auto& [wid, inst] : instances_) {
    json row = {{"wid", wid}, {"kind", inst.kind}, {"shadow", inst.shadow}, {"derived", inst.derived}};
    if (inst.derivation) {
      json shifts = json::array();
      for (const auto& s : inst.derivation->shifts) {
        json path = json::array();
        for (const auto& st : s.path) path.push_back(proof_step_to_json(st));
        shifts.push_back({{"original", s.original},
                          {"shifted_to", s.shifted_to},
                          {"direction",
                           s.direction == ComponentShift::Direction::Upward ? "upward" : "downward"},
                          {"path", path}});
      }
      row["derivation"] = {{"base", inst.derivation->base}, {"shifts", shifts}};
    }
    instances.push_back(row);
  }
  root["instances"] = instances;

  json relations = json::array();
  for (const auto& [id, r] : relations_) {
    relations.push_back({{"id", id},
                         {"child", rel_end_to_json(r.child)},
                         {"parent", rel_end_to_json(r.parent)},
                         {"marker", marker_name(r.marker)},
                         {"perspective", r.perspective},
                         {"backing_etag", r.backing_etag}});
  }
  root["relations"] = relations;

  json ptags = json::array();
  for (const auto& [id, t] : ptags_) {
    ptags.push_back({{"id", id},
                     {"name", t.name},
                     {"format", format_to_json(t.format)},
                     {"required_with_kind", t.required_with_kind}});
  }
  root["ptags"] = ptags;

  json shadow_ptags = json::array();
  for (const auto& [sid, list] : shadow_ptags_) {
    shadow_ptags.push_back({{"shadow", sid}, {"ptags", list}});
  }
  root["shadow_ptags"] = shadow_ptags;

  json etags = json::array();
  for (const auto& [id, e] : etags_) {
    json evidence = json::array();
    for (const auto& ev : e.evidence) evidence.push_back(evidence_to_json(ev));
    etags.push_back({{"id", id},
                     {"a", e.a},
                     {"b", e.b},
                     {"kind", e.kind == EtagKind::Strong ? "strong" : "weak"},
                     {"evidence", evidence},
                     {"revoked", e.revoked},
                     {"revocation_reason", e.revocation_reason}});
  }
  root["etags"] = etags;

  json schemas = json::array();
  for (const auto& [id, s] : schemas_) {
    json cols = json::array();
    for (const auto& c : s.columns) cols.push_back({{"kind", c.kind}, {"ptag", c.ptag}});
    schemas.push_back({{"id", id},
                       {"perspective", s.perspective},
                       {"name", s.name},
                       {"row_kind", s.row_kind},
                       {"columns", cols},
                       {"key_kind", s.key_kind}});
  }
  root["schemas"] = schemas;

  json processes = json::array();
  for (const auto& [id, p] : processes_) {
    json rules = json::array();
    for (const auto& r : p.rules) rules.push_back({{"rule_id", r.id}, {"text", r.text}});
    processes.push_back({{"id", id}, {"name", p.name}, {"rules", rules}});
  }
  root["processes"] = processes;

  json converters = json::array();
  for (const auto& [key, fn] : converters_) {
    converters.push_back({{"from", key.first}, {"to", key.second}, {"fn", fn}});
  }
  root["converters"] = converters;

  json feed_keys = json::array();
  for (const auto& [schema_id, keys] : feed_rows_) {
    for (const auto& [key, rows] : keys) {
      feed_keys.push_back({{"schema", schema_id}, {"key", key}, {"rows", rows}});
    }
  }
  root["feed_keys"] = feed_keys;

  root["counters"] = {{"shadow", next_shadow_},      {"wid", next_wid_},
                      {"perspective", next_perspective_}, {"kind", next_kind_},
                      {"ptag", next_ptag_},          {"relation", next_relation_},
                      {"etag", next_etag_},          {"schema", next_schema_},
                      {"process", next_process_}};
  return root.dump();
}

}  // namespace shadow
