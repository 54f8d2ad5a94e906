#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shadow/engine.hpp"
#include "shadow/store.hpp"

namespace shadow::algebra {

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

// Decomposition rendering of one matched instance: semantic children plus
// synchronization hops, with data-space values.
struct Rendering {
  Wid wid = kNoId;
  std::string kind;  // qualified "P1:Customer_ID"
  std::optional<ShadowId> shadow;
  std::optional<std::string> value;
  bool archived = false;
  bool derived = false;
  std::vector<Rendering> children;
};

struct ProvenanceRef {
  enum class Kind { Relation, Etag, Derivation, SharedShadow, Rule };
  Kind kind = Kind::Rule;
  std::uint64_t id = 0;
  std::string note;
};

struct ResultItem {
  std::optional<ShadowId> shadow;
  Wid wid = kNoId;
  std::vector<Rendering> renderings;  // >1 when structures were merged
  std::vector<ProvenanceRef> provenance;
};

struct ResultSet {
  std::vector<ResultItem> items;  // sorted by (shadow, wid)
  std::vector<std::string> advisories;
};

Rendering render_instance(const Store& store, Wid wid);

// ---------------------------------------------------------------------------
// Predicates (MSO-flavored: value terms match at any decomposition depth)
// ---------------------------------------------------------------------------

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class RelOp { IncludedIn, Includes, SameAs };

struct ValueTerm {
  std::string kind;  // qualified
  CmpOp op = CmpOp::Eq;
  std::string constant;
};

struct RelationTerm {
  std::optional<std::string> lhs_kind;  // nullopt = the candidate itself
  RelOp op = RelOp::IncludedIn;
  std::variant<Wid, std::string> rhs;   // WID literal or qualified kind
};

struct Predicate;
using PredicatePtr = std::shared_ptr<Predicate>;

struct Predicate {
  enum class Node { And, Or, Not, Value, Relation };
  Node node = Node::Value;
  std::vector<PredicatePtr> children;  // And/Or (2+), Not (1)
  ValueTerm value;
  RelationTerm relation;

  static PredicatePtr make_value(ValueTerm t);
  static PredicatePtr make_relation(RelationTerm t);
  static PredicatePtr make_and(std::vector<PredicatePtr> cs);
  static PredicatePtr make_or(std::vector<PredicatePtr> cs);
  static PredicatePtr make_not(PredicatePtr c);
};

bool predicate_equal(const Predicate& a, const Predicate& b);

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

struct SelectScope {
  std::optional<std::string> kind;  // qualified; nullopt = all perspectives
  std::optional<Wid> wid;           // direct instance reference
  bool include_derived = false;     // default off for selects, on for joins
};

// OP1
Result<ResultSet> select(const Store& store, const SelectScope& scope,
                         const PredicatePtr& predicate = nullptr);

// OP3/OP4/OP5: duplicate reduction only where overlap is provable (same WID,
// same shadow, or a direct active strong E-tag) — never weak links or values.
ResultSet set_union(const Store& store, const ResultSet& a, const ResultSet& b);
ResultSet set_difference(const Store& store, const ResultSet& a, const ResultSet& b);
ResultSet set_intersect(const Store& store, const ResultSet& a, const ResultSet& b);

// OP2 mapping rules: each target component is produced by copy, concatenation
// (with literal separators), enrichment calls, or constant injection.
struct SourcePart {
  enum class Kind { KindRef, Literal, Enrich };
  Kind kind = Kind::KindRef;
  std::string text;                // kind qualified name, or literal text, or fn name
  std::vector<SourcePart> args;    // Enrich arguments (concatenated)
};

struct ProjectionRule {
  std::string target_kind;            // unqualified target component name
  std::vector<SourcePart> source;     // empty + constant set = constant injection
  std::optional<std::string> constant;
};

Result<ResultSet> project(Engine& engine, const Engine::Ctx& ctx, const SelectScope& source,
                          const PredicatePtr& predicate, const std::string& target_kind_qualified,
                          const std::vector<ProjectionRule>& rules);

// OP6: requires the target kind + template defined first; cross product of
// component selections unless template relations correlate them.
struct ComponentSelection {
  std::string role_kind;  // qualified kind naming the observable role
  ResultSet selection;
};

Result<ResultSet> combine(Engine& engine, const Engine::Ctx& ctx,
                          const std::string& target_kind_qualified,
                          const std::vector<ComponentSelection>& components);

// OP7/OP8
struct JoinSide {
  ResultSet selection;
  std::string key_kind;  // qualified; designated observable
};

Result<ResultSet> join_strong(Engine& engine, const Engine::Ctx& ctx, const JoinSide& a,
                              const JoinSide& b, const std::string& target_kind_qualified);

enum class JoinDirection { Forward, Reverse };  // Forward: a's key ⊆ b's key

Result<ResultSet> join_weak(Engine& engine, const Engine::Ctx& ctx, const JoinSide& a,
                            const JoinSide& b, const std::string& target_kind_qualified,
                            JoinDirection direction);

}  // namespace shadow::algebra
