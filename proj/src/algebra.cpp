#include "shadow/algebra.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "shadow/inference.hpp"

namespace shadow::algebra {

namespace {

std::optional<std::string> live_value(const Store& store, Wid wid) {
  const WTagInstance* inst = store.instance(wid);
  if (!inst || inst->shadow == kNoId) return std::nullopt;
  const Shadow* s = store.shadow(inst->shadow);
  if (!s || s->archived || s->purged) return std::nullopt;
  return s->value;
}

// Candidate formats that can order a matched sub-shadow: P-tags attached to
// the shadow, the kind's required P-tag, then schema columns of the kind.
std::vector<const FormatSpec*> formats_for(const Store& store, Wid wid) {
  std::vector<const FormatSpec*> out;
  const WTagInstance* inst = store.instance(wid);
  if (!inst) return out;
  if (inst->shadow != kNoId) {
    for (PtagId pid : store.ptags_on_shadow(inst->shadow)) {
      out.push_back(&store.ptag(pid)->format);
    }
  }
  if (auto req = store.required_ptag_of_kind(inst->kind)) {
    out.push_back(&store.ptag(*req)->format);
  }
  for (const auto& [sid, schema] : store.schemas()) {
    for (const auto& col : schema.columns) {
      if (col.kind == inst->kind) out.push_back(&store.ptag(col.ptag)->format);
    }
  }
  return out;
}

struct Descendant {
  Wid wid = kNoId;
  std::vector<ProvenanceRef> via;  // E-tag hops used to reach it
};

// Descendant-or-self traversal of a decomposition: semantic children plus
// synchronization hops (strong E-tags bridge two decompositions of one
// meaning). Cycle-guarded, deterministic order.
std::vector<Descendant> descendants_or_self(const Store& store, Wid root) {
  std::vector<Descendant> out;
  std::set<Wid> visited{root};
  std::deque<Descendant> frontier{{root, {}}};
  while (!frontier.empty()) {
    Descendant cur = frontier.front();
    frontier.pop_front();
    out.push_back(cur);
    for (RelationId rid : store.relations_of_parent({RelEnd::Level::Instance, cur.wid})) {
      const SemanticRelation* r = store.relation(rid);
      if (r->child.level != RelEnd::Level::Instance) continue;
      if (visited.count(r->child.id)) continue;
      visited.insert(r->child.id);
      frontier.push_back({r->child.id, cur.via});
    }
    for (EtagId eid : store.etags_of(cur.wid)) {
      const ETag* e = store.etag(eid);
      if (e->revoked || e->kind != EtagKind::Strong) continue;
      const Wid other = (e->a == cur.wid) ? e->b : e->a;
      if (visited.count(other)) continue;
      visited.insert(other);
      Descendant next{other, cur.via};
      next.via.push_back({ProvenanceRef::Kind::Etag, eid, "synchronization hop"});
      frontier.push_back(next);
    }
  }
  return out;
}

Result<bool> compare_values(const Store& store, Wid wid, CmpOp op, const std::string& constant) {
  const auto value = live_value(store, wid);
  if (!value) return false;  // archived or valueless: no witness
  if (op == CmpOp::Eq) return *value == constant;
  if (op == CmpOp::Ne) return *value != constant;
  // Ordered comparison requires a P-tag establishing an ordered format.
  for (const FormatSpec* f : formats_for(store, wid)) {
    if (!format_ordered(*f)) continue;
    auto lhs = format_order_key(*f, *value);
    auto rhs = format_order_key(*f, constant);
    if (!lhs || !rhs) continue;
    switch (op) {
      case CmpOp::Lt: return *lhs < *rhs;
      case CmpOp::Le: return *lhs <= *rhs;
      case CmpOp::Gt: return *lhs > *rhs;
      case CmpOp::Ge: return *lhs >= *rhs;
      default: break;
    }
  }
  return make_error(Errc::TypeError,
                    "ordered comparison needs an ordered P-tag format on kind-tagged values");
}

Result<KindId> resolve_kind(const Store& store, const std::string& qualified) {
  if (auto id = store.kind_by_qualified(qualified)) return *id;
  std::string msg = "unknown kind \"" + qualified + "\"";
  const auto near = store.kind_name_candidates(qualified, 3);
  if (!near.empty()) {
    msg += "; near matches:";
    for (const auto& n : near) msg += " " + n;
  }
  return make_error(Errc::NameError, msg);
}

bool relation_same_as(const Store& store, Wid x, Wid y) {
  if (x == y) return true;
  const WTagInstance* ix = store.instance(x);
  const WTagInstance* iy = store.instance(y);
  if (ix && iy && ix->shadow != kNoId && ix->shadow == iy->shadow) return true;
  return store.strong_link(x, y).has_value();
}

struct MatchState {
  std::vector<ProvenanceRef> used;
};

Result<bool> eval_predicate(const Store& store, const Predicate& p, Wid candidate,
                            MatchState& state);

Result<bool> eval_value_term(const Store& store, const ValueTerm& t, Wid candidate,
                             MatchState& state) {
  auto kind = resolve_kind(store, t.kind);
  if (!kind) return kind.error();
  for (const Descendant& d : descendants_or_self(store, candidate)) {
    const WTagInstance* inst = store.instance(d.wid);
    if (!inst || inst->kind != *kind) continue;
    auto cmp = compare_values(store, d.wid, t.op, t.constant);
    if (!cmp) return cmp.error();
    if (*cmp) {
      for (const auto& ref : d.via) state.used.push_back(ref);
      return true;
    }
  }
  return false;
}

Result<bool> eval_relation_term(const Store& store, const RelationTerm& t, Wid candidate,
                                MatchState& state) {
  // Left side: the candidate itself, or any kind-tagged sub-instance of it.
  std::vector<Wid> lhs;
  if (!t.lhs_kind) {
    lhs.push_back(candidate);
  } else {
    auto kind = resolve_kind(store, *t.lhs_kind);
    if (!kind) return kind.error();
    for (const Descendant& d : descendants_or_self(store, candidate)) {
      const WTagInstance* inst = store.instance(d.wid);
      if (inst && inst->kind == *kind) lhs.push_back(d.wid);
    }
  }
  // Right side: a WID literal, or any instance of the named kind.
  std::vector<Wid> rhs;
  if (std::holds_alternative<Wid>(t.rhs)) {
    rhs.push_back(std::get<Wid>(t.rhs));
  } else {
    auto kind = resolve_kind(store, std::get<std::string>(t.rhs));
    if (!kind) return kind.error();
    rhs = store.instances_of_kind(*kind);
  }
  for (Wid x : lhs) {
    for (Wid y : rhs) {
      bool hit = false;
      std::optional<InclusionProof> proof;
      switch (t.op) {
        case RelOp::IncludedIn: {
          auto r = inclusion_holds(store, x, y);
          if (r.status == InclusionOutcome::Status::ResourceLimit) {
            return make_error(Errc::ResourceLimit, "inclusion search exceeded the safety cap");
          }
          hit = r.holds();
          proof = r.proof;
          break;
        }
        case RelOp::Includes: {
          auto r = inclusion_holds(store, y, x);
          if (r.status == InclusionOutcome::Status::ResourceLimit) {
            return make_error(Errc::ResourceLimit, "inclusion search exceeded the safety cap");
          }
          hit = r.holds();
          proof = r.proof;
          break;
        }
        case RelOp::SameAs:
          hit = relation_same_as(store, x, y);
          break;
      }
      if (hit) {
        if (proof) {
          for (const ProofStep& s : proof->steps) {
            state.used.push_back({s.via == ProofStep::Via::Relation
                                      ? ProvenanceRef::Kind::Relation
                                      : ProvenanceRef::Kind::Etag,
                                  s.id, "relation term"});
          }
        }
        return true;
      }
    }
  }
  return false;
}

Result<bool> eval_predicate(const Store& store, const Predicate& p, Wid candidate,
                            MatchState& state) {
  switch (p.node) {
    case Predicate::Node::Value:
      return eval_value_term(store, p.value, candidate, state);
    case Predicate::Node::Relation:
      return eval_relation_term(store, p.relation, candidate, state);
    case Predicate::Node::Not: {
      auto r = eval_predicate(store, *p.children.at(0), candidate, state);
      if (!r) return r.error();
      return !*r;
    }
    case Predicate::Node::And: {
      for (const auto& c : p.children) {
        auto r = eval_predicate(store, *c, candidate, state);
        if (!r) return r.error();
        if (!*r) return false;
      }
      return true;
    }
    case Predicate::Node::Or: {
      for (const auto& c : p.children) {
        auto r = eval_predicate(store, *c, candidate, state);
        if (!r) return r.error();
        if (*r) return true;
      }
      return false;
    }
  }
  return false;
}

void sort_items(ResultSet& rs) {
  std::sort(rs.items.begin(), rs.items.end(), [](const ResultItem& a, const ResultItem& b) {
    const ShadowId sa = a.shadow.value_or(0);
    const ShadowId sb = b.shadow.value_or(0);
    return std::tie(sa, a.wid) < std::tie(sb, b.wid);
  });
}

ResultItem make_item(const Store& store, Wid wid, std::vector<ProvenanceRef> provenance) {
  ResultItem item;
  item.wid = wid;
  const WTagInstance* inst = store.instance(wid);
  if (inst && inst->shadow != kNoId) item.shadow = inst->shadow;
  if (inst && inst->derived) {
    provenance.push_back({ProvenanceRef::Kind::Derivation, wid, "level-shift derivation"});
  }
  item.renderings.push_back(render_instance(store, wid));
  item.provenance = std::move(provenance);
  return item;
}

// Same WID, same underlying shadow, or a direct active strong E-tag; weak
// links and value equality never identify items.
std::optional<ProvenanceRef> provably_same(const Store& store, const ResultItem& a,
                                           const ResultItem& b) {
  if (a.wid == b.wid) return ProvenanceRef{ProvenanceRef::Kind::Rule, a.wid, "same WID"};
  if (a.shadow && b.shadow && *a.shadow == *b.shadow) {
    return ProvenanceRef{ProvenanceRef::Kind::SharedShadow, *a.shadow, "same shadow"};
  }
  if (auto etag = store.strong_link(a.wid, b.wid)) {
    return ProvenanceRef{ProvenanceRef::Kind::Etag, *etag, "strong equivalence"};
  }
  return std::nullopt;
}

void note_weak_links(const Store& store, const ResultSet& a, const ResultSet& b, ResultSet& out) {
  for (const ResultItem& x : a.items) {
    for (const ResultItem& y : b.items) {
      if (auto etag = store.weak_link(x.wid, y.wid)) {
        out.advisories.push_back("weak E-tag #" + std::to_string(*etag) + " links #" +
                                 std::to_string(x.wid) + " ⊆ #" + std::to_string(y.wid) +
                                 " (justifies joins, not identity)");
      } else if (auto rev = store.weak_link(y.wid, x.wid)) {
        out.advisories.push_back("weak E-tag #" + std::to_string(*rev) + " links #" +
                                 std::to_string(y.wid) + " ⊆ #" + std::to_string(x.wid) +
                                 " (justifies joins, not identity)");
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

Rendering render_rec(const Store& store, Wid wid, std::set<Wid>& visited) {
  Rendering r;
  r.wid = wid;
  const WTagInstance* inst = store.instance(wid);
  if (!inst) return r;
  r.kind = store.qualified_kind_name(inst->kind);
  r.derived = inst->derived;
  if (inst->shadow != kNoId) {
    r.shadow = inst->shadow;
    if (const Shadow* s = store.shadow(inst->shadow)) {
      r.archived = s->archived;
      if (!s->archived && !s->purged) r.value = s->value;
    }
  }
  for (RelationId rid : store.relations_of_parent({RelEnd::Level::Instance, wid})) {
    const SemanticRelation* rel = store.relation(rid);
    if (rel->child.level != RelEnd::Level::Instance) continue;
    if (visited.count(rel->child.id)) continue;
    visited.insert(rel->child.id);
    r.children.push_back(render_rec(store, rel->child.id, visited));
  }
  return r;
}

}  // namespace

Rendering render_instance(const Store& store, Wid wid) {
  std::set<Wid> visited{wid};
  return render_rec(store, wid, visited);
}

// ---------------------------------------------------------------------------
// Predicate constructors
// ---------------------------------------------------------------------------

PredicatePtr Predicate::make_value(ValueTerm t) {
  auto p = std::make_shared<Predicate>();
  p->node = Node::Value;
  p->value = std::move(t);
  return p;
}

PredicatePtr Predicate::make_relation(RelationTerm t) {
  auto p = std::make_shared<Predicate>();
  p->node = Node::Relation;
  p->relation = std::move(t);
  return p;
}

PredicatePtr Predicate::make_and(std::vector<PredicatePtr> cs) {
  auto p = std::make_shared<Predicate>();
  p->node = Node::And;
  p->children = std::move(cs);
  return p;
}

PredicatePtr Predicate::make_or(std::vector<PredicatePtr> cs) {
  auto p = std::make_shared<Predicate>();
  p->node = Node::Or;
  p->children = std::move(cs);
  return p;
}

PredicatePtr Predicate::make_not(PredicatePtr c) {
  auto p = std::make_shared<Predicate>();
  p->node = Node::Not;
  p->children.push_back(std::move(c));
  return p;
}

bool predicate_equal(const Predicate& a, const Predicate& b) {
  if (a.node != b.node) return false;
  switch (a.node) {
    case Predicate::Node::Value:
      return a.value.kind == b.value.kind && a.value.op == b.value.op &&
             a.value.constant == b.value.constant;
    case Predicate::Node::Relation:
      return a.relation.lhs_kind == b.relation.lhs_kind && a.relation.op == b.relation.op &&
             a.relation.rhs == b.relation.rhs;
    default: {
      if (a.children.size() != b.children.size()) return false;
      for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!predicate_equal(*a.children[i], *b.children[i])) return false;
      }
      return true;
    }
  }
}

// ---------------------------------------------------------------------------
// OP1 select
// ---------------------------------------------------------------------------

Result<ResultSet> select(const Store& store, const SelectScope& scope,
                         const PredicatePtr& predicate) {
  ResultSet rs;
  std::vector<Wid> candidates;
  if (scope.wid) {
    if (!store.instance(*scope.wid)) {
      return make_error(Errc::NotFound, "WID #" + std::to_string(*scope.wid) + " not found");
    }
    candidates.push_back(*scope.wid);
  } else if (scope.kind) {
    auto kind = resolve_kind(store, *scope.kind);
    if (!kind) return kind.error();
    candidates = store.instances_of_kind(*kind);
  } else {
    for (const auto& [wid, _] : store.instances()) candidates.push_back(wid);
  }
  for (Wid wid : candidates) {
    const WTagInstance* inst = store.instance(wid);
    if (inst->derived && !scope.include_derived && !scope.wid) continue;
    MatchState state;
    if (predicate) {
      auto r = eval_predicate(store, *predicate, wid, state);
      if (!r) return r.error();
      if (!*r) continue;
    }
    rs.items.push_back(make_item(store, wid, std::move(state.used)));
  }
  sort_items(rs);
  return rs;
}

// ---------------------------------------------------------------------------
// OP3 / OP4 / OP5
// ---------------------------------------------------------------------------

ResultSet set_union(const Store& store, const ResultSet& a, const ResultSet& b) {
  ResultSet out;
  out.items = a.items;
  for (const ResultItem& y : b.items) {
    ResultItem* merged = nullptr;
    std::optional<ProvenanceRef> why;
    for (ResultItem& x : out.items) {
      if ((why = provably_same(store, x, y))) {
        merged = &x;
        break;
      }
    }
    if (!merged) {
      out.items.push_back(y);
      continue;
    }
    if (merged->wid != y.wid) {
      // one item carrying both decomposition structures
      merged->renderings.insert(merged->renderings.end(), y.renderings.begin(),
                                y.renderings.end());
      merged->provenance.push_back(*why);
    }
    for (const auto& ref : y.provenance) merged->provenance.push_back(ref);
  }
  out.advisories = a.advisories;
  out.advisories.insert(out.advisories.end(), b.advisories.begin(), b.advisories.end());
  sort_items(out);
  return out;
}

ResultSet set_difference(const Store& store, const ResultSet& a, const ResultSet& b) {
  ResultSet out;
  for (const ResultItem& x : a.items) {
    const bool removed = std::any_of(b.items.begin(), b.items.end(), [&](const ResultItem& y) {
      return provably_same(store, x, y).has_value();
    });
    if (!removed) out.items.push_back(x);
  }
  sort_items(out);
  return out;
}

ResultSet set_intersect(const Store& store, const ResultSet& a, const ResultSet& b) {
  ResultSet out;
  for (const ResultItem& x : a.items) {
    for (const ResultItem& y : b.items) {
      if (auto why = provably_same(store, x, y)) {
        ResultItem item = x;
        if (y.wid != x.wid) {
          item.renderings.insert(item.renderings.end(), y.renderings.begin(), y.renderings.end());
          item.provenance.push_back(*why);
        }
        out.items.push_back(std::move(item));
        break;
      }
    }
  }
  if (out.items.empty()) note_weak_links(store, a, b, out);
  sort_items(out);
  return out;
}

// ---------------------------------------------------------------------------
// OP2 project
// ---------------------------------------------------------------------------

namespace {

Result<std::optional<std::string>> eval_source_parts(const Store& store,
                                                     const std::vector<SourcePart>& parts,
                                                     Wid row);

Result<std::optional<std::string>> eval_source_part(const Store& store, const SourcePart& part,
                                                    Wid row) {
  switch (part.kind) {
    case SourcePart::Kind::Literal:
      return std::optional<std::string>(part.text);
    case SourcePart::Kind::KindRef: {
      auto kind = resolve_kind(store, part.text);
      if (!kind) return make_error(Errc::MappingGap, "mapping rule references absent source kind \"" +
                                                         part.text + "\"");
      for (const Descendant& d : descendants_or_self(store, row)) {
        const WTagInstance* inst = store.instance(d.wid);
        if (inst && inst->kind == *kind) {
          if (auto v = live_value(store, d.wid)) return std::optional<std::string>(*v);
        }
      }
      return std::optional<std::string>();  // null propagates
    }
    case SourcePart::Kind::Enrich: {
      EnrichFn fn = find_enrichment(part.text);
      if (!fn) {
        return make_error(Errc::NoConverter,
                          "no enrichment function registered as \"" + part.text + "\"");
      }
      auto inner = eval_source_parts(store, part.args, row);
      if (!inner) return inner.error();
      if (!*inner) return std::optional<std::string>();
      auto enriched = fn(**inner);
      if (!enriched) return enriched.error();
      return std::optional<std::string>(*enriched);
    }
  }
  return std::optional<std::string>();
}

Result<std::optional<std::string>> eval_source_parts(const Store& store,
                                                     const std::vector<SourcePart>& parts,
                                                     Wid row) {
  std::string joined;
  bool any_present = false;
  for (const SourcePart& p : parts) {
    auto v = eval_source_part(store, p, row);
    if (!v) return v.error();
    if (*v) {
      any_present = any_present || p.kind != SourcePart::Kind::Literal;
      joined += **v;
    }
  }
  if (!any_present) return std::optional<std::string>();
  return std::optional<std::string>(std::move(joined));
}

std::string unqualify(const std::string& name) {
  const auto colon = name.find(':');
  return colon == std::string::npos ? name : name.substr(colon + 1);
}

Result<std::string> perspective_part(const std::string& qualified) {
  const auto colon = qualified.find(':');
  if (colon == std::string::npos) {
    return make_error(Errc::NameError, "expected Perspective:Kind, got \"" + qualified + "\"");
  }
  return qualified.substr(0, colon);
}

}  // namespace

Result<ResultSet> project(Engine& engine, const Engine::Ctx& ctx, const SelectScope& source,
                          const PredicatePtr& predicate, const std::string& target_kind_qualified,
                          const std::vector<ProjectionRule>& rules) {
  const Store& store = engine.store();
  auto rows = select(store, source, predicate);
  if (!rows) return rows.error();

  auto pname = perspective_part(target_kind_qualified);
  if (!pname) return pname.error();
  auto target_p = store.perspective_by_name(*pname);
  if (!target_p) {
    return make_error(Errc::NameError, "unknown perspective \"" + *pname + "\"");
  }

  // Validate rules up front: source kinds and enrichment functions.
  std::function<Result<void>(const SourcePart&)> validate_part =
      [&](const SourcePart& p) -> Result<void> {
    if (p.kind == SourcePart::Kind::KindRef) {
      auto k = resolve_kind(store, p.text);
      if (!k) {
        return make_error(Errc::MappingGap,
                          "mapping rule references absent source kind \"" + p.text + "\"");
      }
    }
    if (p.kind == SourcePart::Kind::Enrich) {
      if (!find_enrichment(p.text)) {
        return make_error(Errc::NoConverter,
                          "no enrichment function registered as \"" + p.text + "\"");
      }
      for (const SourcePart& a : p.args) {
        if (auto r = validate_part(a); !r) return r;
      }
    }
    return {};
  };
  for (const ProjectionRule& rule : rules) {
    for (const SourcePart& p : rule.source) {
      if (auto r = validate_part(p); !r) return r.error();
    }
  }

  engine.begin();
  auto fail = [&](Error e) -> Result<ResultSet> {
    engine.abort();
    return e;
  };

  // Target kinds are created on demand in the target perspective.
  auto ensure_kind = [&](const std::string& name, const std::string& desc,
                         std::optional<TemplateDef> templ) -> Result<KindId> {
    if (auto existing = engine.store().kind_by_name(*target_p, name)) return *existing;
    return engine.define_kind(ctx, *target_p, name, desc, std::move(templ));
  };

  TemplateDef templ;
  std::vector<KindId> column_kinds;
  for (const ProjectionRule& rule : rules) {
    auto ck = ensure_kind(unqualify(rule.target_kind), "projected component", std::nullopt);
    if (!ck) return fail(ck.error());
    column_kinds.push_back(*ck);
    templ.edges.push_back({*ck, kNoId, Marker::Unmarked});
  }
  KindId root_kind;
  if (auto existing = engine.store().kind_by_qualified(target_kind_qualified)) {
    root_kind = *existing;
  } else {
    auto rk = ensure_kind(unqualify(target_kind_qualified), "projection target structure",
                          std::move(templ));
    if (!rk) return fail(rk.error());
    root_kind = *rk;
  }

  ResultSet out;
  for (const ResultItem& row : rows->items) {
    std::vector<std::pair<std::string, std::string>> produced;  // role -> value
    std::vector<std::size_t> produced_rule;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const ProjectionRule& rule = rules[i];
      std::optional<std::string> value;
      if (rule.constant) {
        value = *rule.constant;
      } else {
        auto v = eval_source_parts(engine.store(), rule.source, row.wid);
        if (!v) return fail(v.error());
        value = *v;
      }
      if (!value) continue;  // source column null: target sub-W-tag absent
      produced.emplace_back(unqualify(rule.target_kind), *value);
      produced_rule.push_back(i);
    }

    auto sid = engine.insert_shadow(ctx, "", produced);
    if (!sid) return fail(sid.error());
    auto row_wid = engine.attach_wtag(ctx, *sid, root_kind);
    if (!row_wid) return fail(row_wid.error());
    const Shadow* s = engine.store().shadow(*sid);
    std::vector<ProvenanceRef> provenance;
    provenance.push_back({ProvenanceRef::Kind::Rule, row.wid, "projected from #" +
                                                                  std::to_string(row.wid)});
    for (std::size_t i = 0; i < produced.size(); ++i) {
      const ShadowId sub = s->subs[i].second;
      auto col_kind = engine.store().kind_by_name(*target_p, produced[i].first);
      auto col_wid = engine.attach_wtag(ctx, sub, *col_kind);
      if (!col_wid) return fail(col_wid.error());
      auto rel = engine.assert_relation(ctx, {RelEnd::Level::Instance, *col_wid},
                                        {RelEnd::Level::Instance, *row_wid}, Marker::Unmarked);
      if (!rel) return fail(rel.error());
      const ProjectionRule& rule = rules[produced_rule[i]];
      provenance.push_back({ProvenanceRef::Kind::Rule, *rel,
                            rule.constant ? ("constant " + produced[i].first)
                                          : ("rule >> " + produced[i].first)});
    }
    out.items.push_back(make_item(engine.store(), *row_wid, std::move(provenance)));
  }
  if (auto c = engine.commit(); !c) return fail(c.error());
  // renderings were built before commit; rebuild against the final store
  for (ResultItem& item : out.items) {
    item.renderings = {render_instance(engine.store(), item.wid)};
  }
  sort_items(out);
  return out;
}

// ---------------------------------------------------------------------------
// OP6 combine
// ---------------------------------------------------------------------------

namespace {

struct TargetStructure {
  KindId kind = kNoId;
  const TemplateDef* templ = nullptr;
};

Result<TargetStructure> resolve_target(const Store& store, const std::string& qualified) {
  auto kind = store.kind_by_qualified(qualified);
  if (!kind) {
    return make_error(Errc::TemplateRequired,
                      "target structure \"" + qualified + "\" must be defined first");
  }
  const WTagKind* k = store.kind(*kind);
  if (!k->templ) {
    return make_error(Errc::TemplateRequired,
                      "target kind \"" + qualified + "\" has no decomposition template");
  }
  return TargetStructure{*kind, &*k->templ};
}

Marker template_marker(const TemplateDef& templ, KindId child, KindId parent) {
  for (const TemplateEdge& e : templ.edges) {
    if (e.child == child && e.parent == parent) return e.marker;
  }
  return Marker::Unmarked;
}

Result<ResultItem> materialize_composite(Engine& engine, const Engine::Ctx& ctx,
                                         const TargetStructure& target,
                                         const std::vector<const ResultItem*>& parts,
                                         std::vector<ProvenanceRef> provenance,
                                         EtagId backing = kNoId) {
  std::vector<std::pair<std::string, ShadowId>> components;
  for (const ResultItem* part : parts) {
    if (part->shadow) {
      const WTagInstance* inst = engine.store().instance(part->wid);
      components.emplace_back(engine.store().kind(inst->kind)->name, *part->shadow);
    }
  }
  auto sid = engine.create_composite(ctx, "", components);
  if (!sid) return sid.error();
  auto wid = engine.attach_wtag(ctx, *sid, target.kind);
  if (!wid) return wid.error();
  for (const ResultItem* part : parts) {
    const WTagInstance* inst = engine.store().instance(part->wid);
    const Marker marker = template_marker(*target.templ, inst->kind, target.kind);
    auto rel = engine.assert_relation(ctx, {RelEnd::Level::Instance, part->wid},
                                      {RelEnd::Level::Instance, *wid}, marker, backing);
    if (!rel) return rel.error();
    for (const auto& ref : part->provenance) provenance.push_back(ref);
  }
  ResultItem item;
  item.wid = *wid;
  item.shadow = *sid;
  item.provenance = std::move(provenance);
  return item;
}

}  // namespace

Result<ResultSet> combine(Engine& engine, const Engine::Ctx& ctx,
                          const std::string& target_kind_qualified,
                          const std::vector<ComponentSelection>& components) {
  auto target = resolve_target(engine.store(), target_kind_qualified);
  if (!target) return target.error();

  struct Role {
    KindId kind = kNoId;
    const ResultSet* selection = nullptr;
  };
  std::vector<Role> roles;
  for (const ComponentSelection& c : components) {
    auto kind = resolve_kind(engine.store(), c.role_kind);
    if (!kind) return kind.error();
    const bool in_template =
        std::any_of(target->templ->edges.begin(), target->templ->edges.end(),
                    [&](const TemplateEdge& e) { return e.child == *kind; });
    if (!in_template) {
      return make_error(Errc::MappingGap, "component kind \"" + c.role_kind +
                                              "\" is not part of the target template");
    }
    roles.push_back({*kind, &c.selection});
  }

  engine.begin();
  auto fail = [&](Error e) -> Result<ResultSet> {
    engine.abort();
    return e;
  };

  ResultSet out;
  std::vector<std::size_t> pick(roles.size(), 0);
  const bool empty = std::any_of(roles.begin(), roles.end(),
                                 [](const Role& r) { return r.selection->items.empty(); });
  while (!empty && !roles.empty()) {
    std::vector<const ResultItem*> parts;
    for (std::size_t i = 0; i < roles.size(); ++i) {
      parts.push_back(&roles[i].selection->items[pick[i]]);
    }
    // Template relations between component kinds correlate the selections:
    // only inclusion-compatible combinations survive.
    bool correlated_ok = true;
    for (std::size_t i = 0; i < roles.size() && correlated_ok; ++i) {
      for (std::size_t j = 0; j < roles.size() && correlated_ok; ++j) {
        if (i == j) continue;
        for (const TemplateEdge& e : target->templ->edges) {
          if (e.child == roles[i].kind && e.parent == roles[j].kind) {
            auto inc = inclusion_holds(engine.store(), parts[i]->wid, parts[j]->wid);
            if (!inc.holds()) {
              correlated_ok = false;
              break;
            }
          }
        }
      }
    }
    if (correlated_ok) {
      auto item = materialize_composite(engine, ctx, *target, parts,
                                        {{ProvenanceRef::Kind::Rule, target->kind, "combine"}});
      if (!item) return fail(item.error());
      out.items.push_back(*item);
    }
    std::size_t i = 0;
    for (; i < pick.size(); ++i) {
      if (++pick[i] < roles[i].selection->items.size()) break;
      pick[i] = 0;
    }
    if (i == pick.size()) break;
  }
  if (auto c = engine.commit(); !c) return fail(c.error());
  for (ResultItem& item : out.items) {
    item.renderings = {render_instance(engine.store(), item.wid)};
  }
  sort_items(out);
  return out;
}

// ---------------------------------------------------------------------------
// OP7 / OP8 joins
// ---------------------------------------------------------------------------

namespace {

std::optional<Wid> find_key_instance(const Store& store, Wid root, KindId key_kind) {
  for (const Descendant& d : descendants_or_self(store, root)) {
    const WTagInstance* inst = store.instance(d.wid);
    if (inst && inst->kind == key_kind) return d.wid;
  }
  return std::nullopt;
}

// Strong admission: identical WIDs, a shared shadow (synchronization), or a
// direct active strong E-tag.
std::optional<ProvenanceRef> strong_admission(const Store& store, Wid x, Wid y) {
  if (x == y) return ProvenanceRef{ProvenanceRef::Kind::Rule, x, "same WID"};
  const WTagInstance* ix = store.instance(x);
  const WTagInstance* iy = store.instance(y);
  if (ix && iy && ix->shadow != kNoId && ix->shadow == iy->shadow) {
    return ProvenanceRef{ProvenanceRef::Kind::SharedShadow, ix->shadow,
                         "synchronization point (shared shadow)"};
  }
  if (auto etag = store.strong_link(x, y)) {
    return ProvenanceRef{ProvenanceRef::Kind::Etag, *etag, "strong E-tag"};
  }
  return std::nullopt;
}

Result<ResultSet> join_impl(Engine& engine, const Engine::Ctx& ctx, const JoinSide& a,
                            const JoinSide& b, const std::string& target_kind_qualified,
                            std::optional<JoinDirection> weak_direction) {
  auto target = resolve_target(engine.store(), target_kind_qualified);
  if (!target) return target.error();
  auto key_a = resolve_kind(engine.store(), a.key_kind);
  if (!key_a) return key_a.error();
  auto key_b = resolve_kind(engine.store(), b.key_kind);
  if (!key_b) return key_b.error();

  engine.begin();
  auto fail = [&](Error e) -> Result<ResultSet> {
    engine.abort();
    return e;
  };

  ResultSet out;
  for (const ResultItem& x : a.selection.items) {
    auto kx = find_key_instance(engine.store(), x.wid, *key_a);
    if (!kx) continue;
    for (const ResultItem& y : b.selection.items) {
      auto ky = find_key_instance(engine.store(), y.wid, *key_b);
      if (!ky) continue;
      std::optional<ProvenanceRef> admitted;
      if (!weak_direction) {
        admitted = strong_admission(engine.store(), *kx, *ky);
      } else {
        // Admission only along the stored direction of the weak E-tag.
        const Wid from = (*weak_direction == JoinDirection::Forward) ? *kx : *ky;
        const Wid to = (*weak_direction == JoinDirection::Forward) ? *ky : *kx;
        if (auto etag = engine.store().weak_link(from, to)) {
          admitted = ProvenanceRef{ProvenanceRef::Kind::Etag, *etag, "weak E-tag (declared direction)"};
        }
      }
      if (!admitted) continue;
      // Cross-perspective composite edges need an E-tag backing; a shared
      // shadow is materialized as an explicit synchronization point.
      EtagId backing = kNoId;
      if (admitted->kind == ProvenanceRef::Kind::Etag) {
        backing = admitted->id;
      } else if (auto existing = engine.store().strong_link(*kx, *ky)) {
        backing = *existing;
      } else if (admitted->kind == ProvenanceRef::Kind::SharedShadow) {
        const PerspectiveId tp = engine.store().kind(target->kind)->perspective;
        const bool crosses =
            engine.store().perspective_of_instance(x.wid) != tp ||
            engine.store().perspective_of_instance(y.wid) != tp;
        if (crosses) {
          auto sync = engine.synchronize(ctx, *kx, *ky);
          if (!sync) return fail(sync.error());
          backing = *sync;
        }
      }
      auto item = materialize_composite(engine, ctx, *target, {&x, &y}, {*admitted}, backing);
      if (!item) return fail(item.error());
      out.items.push_back(*item);
    }
  }
  if (auto c = engine.commit(); !c) return fail(c.error());
  for (ResultItem& item : out.items) {
    item.renderings = {render_instance(engine.store(), item.wid)};
  }
  sort_items(out);
  return out;
}

}  // namespace

Result<ResultSet> join_strong(Engine& engine, const Engine::Ctx& ctx, const JoinSide& a,
                              const JoinSide& b, const std::string& target_kind_qualified) {
  return join_impl(engine, ctx, a, b, target_kind_qualified, std::nullopt);
}

Result<ResultSet> join_weak(Engine& engine, const Engine::Ctx& ctx, const JoinSide& a,
                            const JoinSide& b, const std::string& target_kind_qualified,
                            JoinDirection direction) {
  return join_impl(engine, ctx, a, b, target_kind_qualified, direction);
}

}  // namespace shadow::algebra
