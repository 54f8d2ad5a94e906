#include "shadow/inference.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>

namespace shadow {

namespace {

struct Edge {
  Wid to = kNoId;
  ProofStep step;
};

// Outgoing inclusion edges from w (w ⊆ to): instance relations child→parent,
// weak E-tags in their declared direction, strong E-tags both ways.
// same_perspective_only restricts every hop to the given perspective.
std::vector<Edge> inclusion_edges(const Store& store, Wid w, bool same_perspective_only,
                                  PerspectiveId perspective) {
  std::vector<Edge> out;
  const RelEnd end{RelEnd::Level::Instance, w};
  for (RelationId rid : store.relations_of_child(end)) {
    const SemanticRelation* r = store.relation(rid);
    if (r->parent.level != RelEnd::Level::Instance) continue;
    const Wid to = r->parent.id;
    if (same_perspective_only && (store.perspective_of_instance(to) != perspective ||
                                  store.perspective_of_instance(w) != perspective)) {
      continue;
    }
    out.push_back({to, {ProofStep::Via::Relation, rid, w, to}});
  }
  for (EtagId eid : store.etags_of(w)) {
    const ETag* e = store.etag(eid);
    if (e->revoked) continue;
    Wid to = kNoId;
    if (e->kind == EtagKind::Weak) {
      if (e->a == w) to = e->b;
    } else {
      to = (e->a == w) ? e->b : e->a;
    }
    if (to == kNoId) continue;
    if (same_perspective_only && (store.perspective_of_instance(to) != perspective ||
                                  store.perspective_of_instance(w) != perspective)) {
      continue;
    }
    out.push_back({to, {ProofStep::Via::Etag, eid, w, to}});
  }
  return out;
}

struct SearchResult {
  bool found = false;
  bool truncated = false;
  std::vector<ProofStep> steps;
};

SearchResult bfs_inclusion(const Store& store, Wid a, Wid b, bool same_perspective_only,
                           PerspectiveId perspective, std::size_t step_cap) {
  SearchResult result;
  if (a == b) {
    result.found = true;
    return result;
  }
  std::map<Wid, ProofStep> came_from;
  std::deque<Wid> frontier{a};
  std::set<Wid> visited{a};
  std::size_t steps = 0;
  while (!frontier.empty()) {
    const Wid cur = frontier.front();
    frontier.pop_front();
    for (const Edge& e : inclusion_edges(store, cur, same_perspective_only, perspective)) {
      if (++steps > step_cap) {
        result.truncated = true;
        return result;
      }
      if (visited.count(e.to)) continue;
      visited.insert(e.to);
      came_from[e.to] = e.step;
      if (e.to == b) {
        // reconstruct
        std::vector<ProofStep> chain;
        Wid at = b;
        while (at != a) {
          const ProofStep& s = came_from.at(at);
          chain.push_back(s);
          at = s.from;
        }
        std::reverse(chain.begin(), chain.end());
        result.found = true;
        result.steps = std::move(chain);
        return result;
      }
      frontier.push_back(e.to);
    }
  }
  return result;
}

InclusionProof make_proof(const Store& store, std::vector<ProofStep> steps) {
  InclusionProof proof;
  for (const ProofStep& s : steps) {
    const PerspectiveId pf = store.perspective_of_instance(s.from);
    const PerspectiveId pt = store.perspective_of_instance(s.to);
    if (pf != pt) proof.perspectives_crossed.push_back(pt);
  }
  proof.steps = std::move(steps);
  return proof;
}

}  // namespace

InclusionOutcome inclusion_holds(const Store& store, Wid a, Wid b, std::size_t step_cap) {
  InclusionOutcome outcome;
  if (!store.instance(a) || !store.instance(b)) {
    outcome.status = InclusionOutcome::Status::NotIncluded;
    return outcome;
  }
  if (a == b) {  // Property 1
    outcome.status = InclusionOutcome::Status::Holds;
    outcome.proof = InclusionProof{};
    return outcome;
  }
  SearchResult r = bfs_inclusion(store, a, b, false, kNoId, step_cap);
  if (r.truncated) {
    outcome.status = InclusionOutcome::Status::ResourceLimit;
    return outcome;
  }
  if (r.found) {
    outcome.status = InclusionOutcome::Status::Holds;
    outcome.proof = make_proof(store, std::move(r.steps));
  }
  return outcome;
}

std::vector<std::vector<Wid>> strong_equivalence_classes(const Store& store,
                                                         const std::vector<Wid>& wids) {
  // Mutual within-perspective inclusion = one region decomposed two ways
  // (Property 5); classes are computed, never rejected.
  std::map<Wid, std::size_t> index;
  for (std::size_t i = 0; i < wids.size(); ++i) index[wids[i]] = i;
  std::vector<std::size_t> parent(wids.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < wids.size(); ++i) {
    for (std::size_t j = i + 1; j < wids.size(); ++j) {
      const PerspectiveId p = store.perspective_of_instance(wids[i]);
      if (p != store.perspective_of_instance(wids[j])) continue;
      if (bfs_inclusion(store, wids[i], wids[j], true, p, kDefaultStepCap).found &&
          bfs_inclusion(store, wids[j], wids[i], true, p, kDefaultStepCap).found) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::map<std::size_t, std::vector<Wid>> groups;
  for (std::size_t i = 0; i < wids.size(); ++i) groups[find(i)].push_back(wids[i]);
  std::vector<std::vector<Wid>> classes;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    classes.push_back(std::move(members));
  }
  std::sort(classes.begin(), classes.end());
  return classes;
}

CompositionVerdict check_composition(const Store& store, Wid a, Wid c, std::size_t step_cap) {
  CompositionVerdict verdict;
  if (!store.instance(a) || !store.instance(c)) return verdict;
  if (a == c) {
    verdict.kind = CompositionVerdict::Kind::Entailed;
    verdict.proof = InclusionProof{};
    return verdict;
  }
  const PerspectiveId pa = store.perspective_of_instance(a);
  if (pa == store.perspective_of_instance(c)) {
    SearchResult within = bfs_inclusion(store, a, c, true, pa, step_cap);
    if (within.found) {  // P = Q = R: transitivity is valid
      verdict.kind = CompositionVerdict::Kind::Entailed;
      verdict.proof = make_proof(store, std::move(within.steps));
      return verdict;
    }
  }
  SearchResult any = bfs_inclusion(store, a, c, false, kNoId, step_cap);
  if (!any.found) return verdict;  // NotRelated
  // Some chain exists, but only across perspective boundaries: surface every
  // crossing E-tag for human re-evaluation of its supporting power.
  verdict.kind = CompositionVerdict::Kind::DecisionRequired;
  for (const ProofStep& s : any.steps) {
    if (store.perspective_of_instance(s.from) == store.perspective_of_instance(s.to)) continue;
    if (s.via == ProofStep::Via::Etag) {
      verdict.boundary.push_back(s.id);
    } else if (const SemanticRelation* rel = store.relation(s.id);
               rel && rel->backing_etag != kNoId) {
      verdict.boundary.push_back(rel->backing_etag);
    }
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Level shifting
// ---------------------------------------------------------------------------

namespace {

struct ShiftCandidate {
  Wid wid = kNoId;
  std::vector<ProofStep> path;
};

// Ancestors via HAS-A (upward=true) or descendants via IS-A (upward=false).
// E-tags bridge perspectives direction-respectingly but do not shift levels
// themselves: a candidate needs at least one marker edge on its path.
std::vector<ShiftCandidate> marker_reachable(const Store& store, Wid start, bool upward,
                                             std::size_t step_cap) {
  using State = std::pair<Wid, bool>;  // (node, path contains a marker edge)
  std::map<State, std::pair<State, ProofStep>> came_from;
  const State root{start, false};
  std::set<State> visited{root};
  std::deque<State> frontier{root};
  std::size_t steps = 0;

  while (!frontier.empty()) {
    const State cur = frontier.front();
    frontier.pop_front();
    const Wid w = cur.first;

    std::vector<std::pair<ProofStep, bool>> edges;  // step + "is marker edge"
    if (upward) {
      for (RelationId rid : store.relations_of_child({RelEnd::Level::Instance, w})) {
        const SemanticRelation* r = store.relation(rid);
        if (r->marker != Marker::HasA || r->parent.level != RelEnd::Level::Instance) continue;
        edges.push_back({{ProofStep::Via::Relation, rid, w, r->parent.id}, true});
      }
    } else {
      for (RelationId rid : store.relations_of_parent({RelEnd::Level::Instance, w})) {
        const SemanticRelation* r = store.relation(rid);
        if (r->marker != Marker::IsA || r->child.level != RelEnd::Level::Instance) continue;
        edges.push_back({{ProofStep::Via::Relation, rid, w, r->child.id}, true});
      }
    }
    for (EtagId eid : store.etags_of(w)) {
      const ETag* e = store.etag(eid);
      if (e->revoked) continue;
      Wid to = kNoId;
      if (e->kind == EtagKind::Strong) {
        to = (e->a == w) ? e->b : e->a;
      } else if (upward && e->a == w) {
        to = e->b;  // a ⊆ b read upward
      } else if (!upward && e->b == w) {
        to = e->a;  // a ⊆ b read downward
      }
      if (to != kNoId) edges.push_back({{ProofStep::Via::Etag, eid, w, to}, false});
    }

    for (const auto& [step, is_marker] : edges) {
      if (++steps > step_cap) break;
      const State next{step.to, cur.second || is_marker};
      if (visited.count(next)) continue;
      visited.insert(next);
      came_from[next] = {cur, step};
      frontier.push_back(next);
    }
  }

  std::vector<ShiftCandidate> out;
  std::set<Wid> seen;
  for (const auto& [state, _] : came_from) {
    if (!state.second || state.first == start || seen.count(state.first)) continue;
    seen.insert(state.first);
    std::vector<ProofStep> path;
    State at = state;
    while (!(at == root)) {
      const auto& [prev, step] = came_from.at(at);
      path.push_back(step);
      at = prev;
    }
    std::reverse(path.begin(), path.end());
    out.push_back({state.first, std::move(path)});
  }
  std::sort(out.begin(), out.end(),
            [](const ShiftCandidate& a, const ShiftCandidate& b) { return a.wid < b.wid; });
  return out;
}

}  // namespace

std::vector<Derivation> enumerate_level_shifts(const Store& store, Wid composite,
                                               std::size_t step_cap) {
  std::vector<Derivation> result;
  const WTagInstance* base = store.instance(composite);
  if (!base) return result;

  // Components: instance children of the composite.
  std::vector<Wid> components;
  for (RelationId rid : store.relations_of_parent({RelEnd::Level::Instance, composite})) {
    const SemanticRelation* r = store.relation(rid);
    if (r->child.level == RelEnd::Level::Instance) components.push_back(r->child.id);
  }
  std::sort(components.begin(), components.end());
  if (components.empty()) return result;

  struct Alternative {
    Wid wid;
    std::optional<ComponentShift> shift;
  };
  std::vector<std::vector<Alternative>> alternatives;
  for (Wid c : components) {
    std::vector<Alternative> alts;
    alts.push_back({c, std::nullopt});
    for (auto& cand : marker_reachable(store, c, true, step_cap)) {
      alts.push_back({cand.wid, ComponentShift{c, cand.wid, ComponentShift::Direction::Upward,
                                               std::move(cand.path)}});
    }
    for (auto& cand : marker_reachable(store, c, false, step_cap)) {
      alts.push_back({cand.wid, ComponentShift{c, cand.wid, ComponentShift::Direction::Downward,
                                               std::move(cand.path)}});
    }
    alternatives.push_back(std::move(alts));
  }

  // Cross product, skipping the all-unshifted combination.
  std::vector<std::size_t> pick(alternatives.size(), 0);
  while (true) {
    Derivation d;
    d.base = composite;
    for (std::size_t i = 0; i < pick.size(); ++i) {
      const Alternative& alt = alternatives[i][pick[i]];
      if (alt.shift) d.shifts.push_back(*alt.shift);
    }
    if (!d.shifts.empty()) result.push_back(std::move(d));
    std::size_t i = 0;
    for (; i < pick.size(); ++i) {
      if (++pick[i] < alternatives[i].size()) break;
      pick[i] = 0;
    }
    if (i == pick.size()) break;
  }
  return result;
}

Result<std::vector<Wid>> infer_level_shift(Engine& engine, const Engine::Ctx& ctx, Wid composite) {
  const WTagInstance* base = engine.store().instance(composite);
  if (!base) return make_error(Errc::NotFound, "WID not found");
  std::vector<Derivation> derivations = enumerate_level_shifts(engine.store(), composite);
  std::vector<Wid> wids;
  for (const Derivation& d : derivations) {
    auto wid = engine.materialize_derived(ctx, base->kind, d);
    if (!wid) return wid.error();
    wids.push_back(*wid);
  }
  std::sort(wids.begin(), wids.end());
  return wids;
}

// ---------------------------------------------------------------------------
// Property checker
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kExhaustiveLimit = 400;

using Entry = PropertyReport::Entry;

void check_p2(const Store& store, PropertyReport& report) {
  std::size_t violations = 0;
  for (const auto& [rid, rel] : store.relations()) {
    // Kind-level edges declare structure; Property 2 quantifies over W-tags
    // of shadows, so only instance edges are checked.
    if (rel.child.level != RelEnd::Level::Instance ||
        rel.parent.level != RelEnd::Level::Instance) {
      continue;
    }
    const PerspectiveId pc = store.perspective_of_instance(rel.child.id);
    const PerspectiveId pp = store.perspective_of_instance(rel.parent.id);
    if (pc == pp) continue;
    const ETag* backing = rel.backing_etag ? store.etag(rel.backing_etag) : nullptr;
    if (!backing) {
      report.entries.push_back({"P2", Entry::Level::Violation,
                                "relation " + std::to_string(rid) +
                                    " crosses perspectives without a backing E-tag"});
      ++violations;
    }
  }
  if (violations == 0) {
    report.entries.push_back(
        {"P2", Entry::Level::Pass, "every cross-perspective inclusion is E-tag-backed"});
  }
}

void check_p5(const Store& store, PropertyReport& report) {
  std::vector<Wid> wids;
  for (const auto& [wid, _] : store.instances()) wids.push_back(wid);
  if (wids.size() > kExhaustiveLimit) {
    report.entries.push_back({"P5", Entry::Level::Pass, "skipped exhaustive scan (store too large)"});
    return;
  }
  // Pairs already joined by a within-perspective chain of strong E-tags are
  // collapsed; only mutual inclusion outside such a class needs an advisory.
  std::map<Wid, Wid> strong_root;
  std::function<Wid(Wid)> find = [&](Wid w) {
    auto it = strong_root.find(w);
    if (it == strong_root.end() || it->second == w) return w;
    return it->second = find(it->second);
  };
  for (const auto& [eid, e] : store.etags()) {
    if (e.revoked || e.kind != EtagKind::Strong) continue;
    if (store.perspective_of_instance(e.a) != store.perspective_of_instance(e.b)) continue;
    strong_root.try_emplace(e.a, e.a);
    strong_root.try_emplace(e.b, e.b);
    strong_root[find(e.a)] = find(e.b);
  }

  std::size_t advisories = 0;
  for (std::size_t i = 0; i < wids.size(); ++i) {
    for (std::size_t j = i + 1; j < wids.size(); ++j) {
      const PerspectiveId p = store.perspective_of_instance(wids[i]);
      if (p != store.perspective_of_instance(wids[j])) continue;
      const bool ab = bfs_inclusion(store, wids[i], wids[j], true, p, kDefaultStepCap).found;
      const bool ba = bfs_inclusion(store, wids[j], wids[i], true, p, kDefaultStepCap).found;
      if (!ab || !ba) continue;
      const bool collapsed = strong_root.count(wids[i]) && strong_root.count(wids[j]) &&
                             find(wids[i]) == find(wids[j]);
      if (!collapsed) {
        report.entries.push_back(
            {"P5", Entry::Level::Advisory,
             "mutual inclusion between #" + std::to_string(wids[i]) + " and #" +
                 std::to_string(wids[j]) + " should be collapsed to a strong E-tag"});
        ++advisories;
      }
    }
  }
  if (advisories == 0) {
    report.entries.push_back(
        {"P5", Entry::Level::Pass, "all mutual inclusions are collapsed to strong equivalence"});
  }
}

void check_p6(const Store& store, PropertyReport& report) {
  std::vector<Wid> wids;
  for (const auto& [wid, _] : store.instances()) wids.push_back(wid);
  if (wids.size() > kExhaustiveLimit) {
    report.entries.push_back({"P6", Entry::Level::Pass, "skipped exhaustive scan (store too large)"});
    return;
  }
  for (Wid a : wids) {
    for (Wid c : wids) {
      if (a == c) continue;
      CompositionVerdict v = check_composition(store, a, c);
      if (v.kind == CompositionVerdict::Kind::Entailed && v.proof &&
          !v.proof->perspectives_crossed.empty()) {
        report.entries.push_back({"P6", Entry::Level::Violation,
                                  "entailment from #" + std::to_string(a) + " to #" +
                                      std::to_string(c) + " crosses a perspective boundary"});
        return;
      }
    }
  }
  report.entries.push_back(
      {"P6", Entry::Level::Pass, "no entailment crosses a perspective boundary"});
}

void check_p9(const Store& store, PropertyReport& report) {
  std::vector<Wid> wids;
  for (const auto& [wid, _] : store.instances()) wids.push_back(wid);
  if (wids.size() > kExhaustiveLimit) {
    report.entries.push_back({"P9", Entry::Level::Pass, "skipped exhaustive scan (store too large)"});
    return;
  }
  std::size_t gaps = 0;
  for (Wid j : wids) {
    for (Wid k : wids) {
      if (j == k) continue;
      const PerspectiveId p = store.perspective_of_instance(j);
      if (p != store.perspective_of_instance(k)) continue;
      std::vector<Wid> lower_j;
      for (Wid x : wids) {
        if (x != j && bfs_inclusion(store, x, j, true, p, kDefaultStepCap).found) {
          lower_j.push_back(x);
        }
      }
      if (lower_j.empty()) continue;
      const bool all_below_k = std::all_of(lower_j.begin(), lower_j.end(), [&](Wid x) {
        return x == k || bfs_inclusion(store, x, k, true, p, kDefaultStepCap).found;
      });
      if (all_below_k && !bfs_inclusion(store, j, k, true, p, kDefaultStepCap).found) {
        ++gaps;
        if (gaps <= 3) {
          report.entries.push_back(
              {"P9", Entry::Level::Advisory,
               "every region under #" + std::to_string(j) + " is also under #" +
                   std::to_string(k) + " but #" + std::to_string(j) + " ⊆ #" +
                   std::to_string(k) + " is not asserted (closure gap)"});
        }
      }
    }
  }
  if (gaps == 0) {
    report.entries.push_back({"P9", Entry::Level::Pass, "no closure gaps"});
  }
}

// Constructive open-world witnesses on a scratch copy: the engine must never
// reject adding a parent (P3), a child (P4), an intermediate region (P7) or
// an enclosing region for any pair (P8).
void check_witnesses(const Store& store, PropertyReport& report) {
  std::vector<Wid> sample;
  for (const auto& [wid, inst] : store.instances()) {
    if (inst.derived) continue;
    sample.push_back(wid);
    if (sample.size() >= 12) break;
  }
  if (sample.empty()) {
    report.entries.push_back({"P3", Entry::Level::Pass, "vacuous (no instances)"});
    report.entries.push_back({"P4", Entry::Level::Pass, "vacuous (no instances)"});
    report.entries.push_back({"P7", Entry::Level::Pass, "vacuous (no inclusions)"});
    report.entries.push_back({"P8", Entry::Level::Pass, "vacuous (no instances)"});
    return;
  }

  Engine scratch{Store(store)};
  const Engine::Ctx ctx{};
  std::size_t counter = 0;
  auto fresh_name = [&] { return "witness_" + std::to_string(++counter); };

  auto add_region = [&](PerspectiveId p, std::optional<KindId> kind,
                        const std::string& value) -> Result<Wid> {
    scratch.begin();
    KindId k;
    if (kind) {
      k = *kind;
    } else {
      auto kr = scratch.define_kind(ctx, p, fresh_name(), "constructive witness region");
      if (!kr) {
        scratch.abort();
        return kr.error();
      }
      k = *kr;
    }
    auto sid = scratch.insert_shadow(ctx, value);
    if (!sid) {
      scratch.abort();
      return sid.error();
    }
    auto wid = scratch.attach_wtag(ctx, *sid, k);
    if (!wid) {
      scratch.abort();
      return wid.error();
    }
    if (auto c = scratch.commit(); !c) {
      scratch.abort();
      return c.error();
    }
    return *wid;
  };

  auto shadow_value = [&](Wid w) -> std::string {
    const WTagInstance* inst = scratch.store().instance(w);
    if (!inst || inst->shadow == kNoId) return "witness";
    const Shadow* s = scratch.store().shadow(inst->shadow);
    return s ? (s->archived ? s->archive_value.value_or("") : s->value) : "witness";
  };

  bool p3_ok = true, p4_ok = true, p7_ok = true, p8_ok = true;
  std::string p3_msg, p4_msg, p7_msg, p8_msg;

  for (Wid w : sample) {
    const PerspectiveId p = store.perspective_of_instance(w);
    // P3: fresh parent region including w
    if (auto parent = add_region(p, std::nullopt, "witness")) {
      auto rel = scratch.assert_relation(ctx, {RelEnd::Level::Instance, w},
                                         {RelEnd::Level::Instance, *parent}, Marker::Unmarked);
      if (!rel) {
        p3_ok = false;
        p3_msg = rel.error().message;
      }
    } else {
      p3_ok = false;
      p3_msg = parent.error().message;
    }
    // P4: fresh child region of w's own kind (homogeneous decomposition)
    const KindId wk = store.instance(w)->kind;
    if (auto child = add_region(p, wk, shadow_value(w))) {
      auto rel = scratch.assert_relation(ctx, {RelEnd::Level::Instance, *child},
                                         {RelEnd::Level::Instance, w}, Marker::Unmarked);
      if (!rel) {
        p4_ok = false;
        p4_msg = rel.error().message;
      }
    } else {
      p4_ok = false;
      p4_msg = child.error().message;
    }
  }

  // P8: fresh enclosing region for every same-perspective pair in the sample
  for (std::size_t i = 0; i < sample.size() && p8_ok; ++i) {
    for (std::size_t j = i + 1; j < sample.size() && p8_ok; ++j) {
      const PerspectiveId p = store.perspective_of_instance(sample[i]);
      if (p != store.perspective_of_instance(sample[j])) continue;
      auto enclosing = add_region(p, std::nullopt, "witness");
      if (!enclosing) {
        p8_ok = false;
        p8_msg = enclosing.error().message;
        break;
      }
      for (Wid w : {sample[i], sample[j]}) {
        auto rel = scratch.assert_relation(ctx, {RelEnd::Level::Instance, w},
                                           {RelEnd::Level::Instance, *enclosing}, Marker::Unmarked);
        if (!rel) {
          p8_ok = false;
          p8_msg = rel.error().message;
          break;
        }
      }
    }
  }

  // P7: interpolate between asserted within-perspective instance inclusions
  std::size_t p7_checked = 0;
  for (const auto& [rid, rel] : store.relations()) {
    if (p7_checked >= 8 || !p7_ok) break;
    if (rel.child.level != RelEnd::Level::Instance || rel.parent.level != RelEnd::Level::Instance) {
      continue;
    }
    const Wid a = rel.child.id;
    const Wid c = rel.parent.id;
    const KindId ck = store.instance(c)->kind;
    ++p7_checked;
    auto mid = add_region(rel.perspective, ck, shadow_value(c));
    if (!mid) {
      p7_ok = false;
      p7_msg = mid.error().message;
      break;
    }
    auto r1 = scratch.assert_relation(ctx, {RelEnd::Level::Instance, a},
                                      {RelEnd::Level::Instance, *mid}, rel.marker);
    auto r2 = scratch.assert_relation(ctx, {RelEnd::Level::Instance, *mid},
                                      {RelEnd::Level::Instance, c}, rel.marker);
    if (!r1 || !r2) {
      p7_ok = false;
      p7_msg = (!r1 ? r1.error() : r2.error()).message;
    }
  }

  auto entry = [&](const char* name, bool ok, const std::string& msg, const char* pass_msg) {
    report.entries.push_back({name, ok ? Entry::Level::Pass : Entry::Level::Violation,
                              ok ? pass_msg : msg});
  };
  entry("P3", p3_ok, p3_msg, "adding a parent region always succeeds (open world)");
  entry("P4", p4_ok, p4_msg, "adding a child region always succeeds (open world)");
  entry("P7", p7_ok, p7_msg, "a region can always be inserted between an inclusion pair");
  entry("P8", p8_ok, p8_msg, "an enclosing region always exists for any pair");
}

}  // namespace

bool PropertyReport::has_violation() const {
  return std::any_of(entries.begin(), entries.end(),
                     [](const Entry& e) { return e.level == Entry::Level::Violation; });
}

std::string PropertyReport::to_text() const {
  std::string out;
  for (const Entry& e : entries) {
    const char* level = e.level == Entry::Level::Pass        ? "pass"
                        : e.level == Entry::Level::Advisory ? "advisory"
                                                            : "VIOLATION";
    out += e.property + " [" + level + "] " + e.detail + "\n";
  }
  return out;
}

PropertyReport check_properties(const Store& store) {
  PropertyReport report;
  report.entries.push_back({"P1", Entry::Level::Pass,
                            "reflexivity holds for every WID by construction"});
  check_p2(store, report);
  check_p5(store, report);
  check_p6(store, report);
  check_p9(store, report);
  check_witnesses(store, report);
  std::sort(report.entries.begin(), report.entries.end(),
            [](const Entry& a, const Entry& b) { return a.property < b.property; });
  return report;
}

}  // namespace shadow
