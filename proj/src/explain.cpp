#include "shadow/explain.hpp"

#include <algorithm>
#include <set>

namespace shadow {

using nlohmann::json;

Result<ExplainTarget> parse_explain_target(const std::string& text) {
  auto parse_id = [](const std::string& s) -> std::optional<std::uint64_t> {
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  };
  ExplainTarget t;
  std::string body;
  if (text.rfind("wid:", 0) == 0) {
    t.type = ExplainTarget::Type::Wid;
    body = text.substr(4);
  } else if (text.rfind("shadow:", 0) == 0) {
    t.type = ExplainTarget::Type::Shadow;
    body = text.substr(7);
  } else if (text.rfind("etag:", 0) == 0) {
    t.type = ExplainTarget::Type::Etag;
    body = text.substr(5);
  } else if (!text.empty() && text[0] == '#') {
    t.type = ExplainTarget::Type::Wid;
    body = text.substr(1);
  } else {
    return make_error(Errc::InvalidArgument,
                      "target must be #<wid>, wid:<id>, shadow:<id> or etag:<id>");
  }
  auto id = parse_id(body);
  if (!id) return make_error(Errc::InvalidArgument, "malformed target id: " + text);
  t.id = *id;
  return t;
}

namespace {

std::uint64_t get_or_zero(const json& j, const char* key) {
  return j.contains(key) ? j.at(key).get<std::uint64_t>() : 0;
}

}  // namespace

// Targets an event touches; explain() completeness is defined over this map.
std::vector<ExplainTarget> affected_targets(const ChangeEvent& e) {
  std::vector<ExplainTarget> out;
  const json& p = e.payload;
  auto shadow = [&](std::uint64_t id) {
    if (id) out.push_back({ExplainTarget::Type::Shadow, id});
  };
  auto wid = [&](std::uint64_t id) {
    if (id) out.push_back({ExplainTarget::Type::Wid, id});
  };
  auto etag = [&](std::uint64_t id) {
    if (id) out.push_back({ExplainTarget::Type::Etag, id});
  };

  if (e.op == "insert_shadow" || e.op == "decompose_shadow") {
    shadow(get_or_zero(p, "shadow_id"));
    shadow(get_or_zero(p, "parent"));
    if (p.contains("subs")) {
      for (const auto& s : p.at("subs")) shadow(s.at("shadow_id").get<std::uint64_t>());
    }
  } else if (e.op == "create_composite") {
    shadow(get_or_zero(p, "shadow_id"));
    for (const auto& c : p.at("components")) shadow(c.at("child").get<std::uint64_t>());
  } else if (e.op == "attach_component") {
    shadow(get_or_zero(p, "parent"));
    shadow(get_or_zero(p, "child"));
  } else if (e.op == "update_value" || e.op == "archive_values" || e.op == "restore_values" ||
             e.op == "purge_shadow" || e.op == "attach_ptag") {
    shadow(get_or_zero(p, "shadow_id"));
  } else if (e.op == "attach_wtag") {
    wid(get_or_zero(p, "wid"));
    shadow(get_or_zero(p, "shadow_id"));
  } else if (e.op == "attach_derived") {
    wid(get_or_zero(p, "wid"));
    wid(get_or_zero(p, "base"));
  } else if (e.op == "assert_relation") {
    const json& child = p.at("child");
    const json& parent = p.at("parent");
    if (child.at("level") == "instance") wid(child.at("id").get<std::uint64_t>());
    if (parent.at("level") == "instance") wid(parent.at("id").get<std::uint64_t>());
  } else if (e.op == "assert_etag") {
    etag(get_or_zero(p, "etag_id"));
    wid(get_or_zero(p, "a"));
    wid(get_or_zero(p, "b"));
  } else if (e.op == "revoke_etag") {
    etag(get_or_zero(p, "etag_id"));
  } else if (e.op == "note_feed_key") {
    shadow(get_or_zero(p, "shadow_id"));
  }
  return out;
}

namespace {

bool touches(const ChangeEvent& e, const ExplainTarget& t) {
  for (const ExplainTarget& a : affected_targets(e)) {
    if (a.type == t.type && a.id == t.id) return true;
  }
  return false;
}

json event_summary(const Store& store, const ChangeEvent& e) {
  json j;
  j["seq"] = e.seq;
  j["op"] = e.op;
  j["timestamp"] = e.timestamp;
  const ProcessRecord* proc = store.process(e.process);
  j["process"] = proc ? proc->name : std::to_string(e.process);
  if (proc) {
    for (const auto& r : proc->rules) {
      if (r.id == e.rule) j["rule"] = r.text;
    }
  }
  if (!e.feed_source.empty()) j["source"] = e.feed_source;
  j["payload"] = e.payload;
  return j;
}

std::string join_unique(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

}  // namespace

Result<Explanation> explain(const Store& store, const std::vector<ChangeEvent>& log,
                            const ExplainTarget& target, const QuestionSet& questions_in) {
  QuestionSet questions = questions_in.any() ? questions_in : QuestionSet::all();

  // Target must exist (possibly archived).
  switch (target.type) {
    case ExplainTarget::Type::Wid:
      if (!store.instance(target.id)) return make_error(Errc::NotFound, "WID not found");
      break;
    case ExplainTarget::Type::Shadow:
      if (!store.shadow(target.id)) return make_error(Errc::NotFound, "shadow not found");
      break;
    case ExplainTarget::Type::Etag:
      if (!store.etag(target.id)) return make_error(Errc::NotFound, "E-tag not found");
      break;
  }

  std::vector<const ChangeEvent*> events;
  for (const ChangeEvent& e : log) {
    if (touches(e, target)) events.push_back(&e);
  }

  json out;
  out["target"] = {{"type", target.type == ExplainTarget::Type::Wid      ? "wid"
                            : target.type == ExplainTarget::Type::Shadow ? "shadow"
                                                                         : "etag"},
                   {"id", target.id}};

  std::set<std::string> who, when, where, why;
  json what = json::array();
  for (const ChangeEvent* e : events) {
    const ProcessRecord* proc = store.process(e->process);
    who.insert(proc ? proc->name : std::to_string(e->process));
    when.insert(e->timestamp);
    if (!e->feed_source.empty()) where.insert(e->feed_source);
    if (proc) {
      for (const auto& r : proc->rules) {
        if (r.id == e->rule) why.insert("rule: " + r.text);
      }
    }
    what.push_back(event_summary(store, *e));
  }
  if (where.empty()) where.insert("local operations");

  // E-tags explain "why" through their evidence; derived WIDs through their
  // derivation chain.
  if (target.type == ExplainTarget::Type::Etag) {
    const ETag* e = store.etag(target.id);
    json evidence = json::array();
    for (const EvidenceRecord& ev : e->evidence) {
      const ProcessRecord* author = store.process(ev.author);
      evidence.push_back({{"author", author ? author->name : std::to_string(ev.author)},
                          {"timestamp", ev.timestamp},
                          {"kind", evidence_kind_name(ev.kind)},
                          {"body", ev.body},
                          {"external_ref", ev.external_ref}});
      why.insert("evidence: " + ev.body);
    }
    out["evidence"] = evidence;
    if (e->revoked) {
      out["revoked"] = true;
      out["revocation_reason"] = e->revocation_reason;
      why.insert("revoked: " + e->revocation_reason);
    }
  }
  if (target.type == ExplainTarget::Type::Wid) {
    const WTagInstance* inst = store.instance(target.id);
    out["kind"] = store.qualified_kind_name(inst->kind);
    if (inst->derivation) {
      json shifts = json::array();
      for (const ComponentShift& s : inst->derivation->shifts) {
        json path = json::array();
        for (const ProofStep& st : s.path) {
          path.push_back({{"via", st.via == ProofStep::Via::Relation ? "relation" : "etag"},
                          {"id", st.id},
                          {"from", st.from},
                          {"to", st.to}});
        }
        shifts.push_back(
            {{"original", s.original},
             {"shifted_to", s.shifted_to},
             {"direction", s.direction == ComponentShift::Direction::Upward ? "upward" : "downward"},
             {"path", path}});
        why.insert("level shift " +
                   std::string(s.direction == ComponentShift::Direction::Upward ? "upward"
                                                                                : "downward") +
                   " from #" + std::to_string(s.original) + " to #" + std::to_string(s.shifted_to));
      }
      out["derivation"] = {{"base", inst->derivation->base}, {"shifts", shifts}};
    }
  }

  if (questions.who) out["who"] = json(std::vector<std::string>(who.begin(), who.end()));
  if (questions.what || questions.how) out["what"] = what;
  if (questions.when) out["when"] = json(std::vector<std::string>(when.begin(), when.end()));
  if (questions.where) out["where"] = json(std::vector<std::string>(where.begin(), where.end()));
  if (questions.why) out["why"] = json(std::vector<std::string>(why.begin(), why.end()));

  Explanation explanation;
  explanation.structured = out;
  explanation.prose = render_prose(out, ProseTemplates{});
  return explanation;
}

std::string render_prose(const json& structured, const ProseTemplates& templates) {
  auto fill = [&](std::string tmpl, const char* placeholder, const std::string& value) {
    const std::string needle = std::string("{") + placeholder + "}";
    const auto pos = tmpl.find(needle);
    if (pos != std::string::npos) tmpl.replace(pos, needle.size(), value);
    return tmpl;
  };
  auto list_of = [&](const char* key) -> std::optional<std::string> {
    if (!structured.contains(key)) return std::nullopt;
    std::set<std::string> items;
    for (const auto& v : structured.at(key)) {
      if (v.is_string()) items.insert(v.get<std::string>());
    }
    return join_unique(items);
  };

  std::string prose;
  if (auto who = list_of("who")) prose += fill(templates.who, "who", *who) + "\n";
  if (structured.contains("what")) {
    std::set<std::string> ops;
    std::set<std::string> hows;
    for (const auto& e : structured.at("what")) {
      ops.insert(e.at("op").get<std::string>() + " (seq " + std::to_string(e.at("seq").get<Seq>()) +
                 ")");
      hows.insert(e.at("op").get<std::string>());
    }
    prose += fill(templates.what, "what", join_unique(ops)) + "\n";
    prose += fill(templates.how, "how", join_unique(hows)) + "\n";
  }
  if (auto when = list_of("when")) prose += fill(templates.when, "when", *when) + "\n";
  if (auto where = list_of("where")) prose += fill(templates.where, "where", *where) + "\n";
  if (auto why = list_of("why")) prose += fill(templates.why, "why", *why) + "\n";
  return prose;
}

}  // namespace shadow
