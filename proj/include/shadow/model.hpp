#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shadow/ids.hpp"
#include "shadow/ptag.hpp"

namespace shadow {

// ---------------------------------------------------------------------------
// Data space
// ---------------------------------------------------------------------------

// A shadow is a value record; it never carries intrinsic meaning. Sub-shadows
// are (role, shadow_id) references: decomposition can share observables, so
// the structure is a DAG, not a tree.
struct Shadow {
  ShadowId id = kNoId;
  std::string value;
  std::vector<std::pair<std::string, ShadowId>> subs;  // insertion order
  bool archived = false;
  std::optional<std::string> archive_value;
  bool purged = false;
};

// ---------------------------------------------------------------------------
// Semantic space
// ---------------------------------------------------------------------------

struct Perspective {
  PerspectiveId id = kNoId;
  std::string name;
  std::string description;
};

// IS-A permits downward meaning propagation, HAS-A upward; unmarked edges
// propagate nothing.
enum class Marker { IsA, HasA, Unmarked };

struct TemplateEdge {
  KindId child = kNoId;
  KindId parent = kNoId;
  Marker marker = Marker::Unmarked;
};

struct TemplateDef {
  std::vector<TemplateEdge> edges;
};

struct WTagKind {
  KindId id = kNoId;
  PerspectiveId perspective = kNoId;
  std::string name;
  std::string description;  // dictionary mechanism; must be non-empty
  std::optional<TemplateDef> templ;  // at most one (Rule #8)
};

// Endpoints of a semantic relation live at one level: kind-level edges are
// template structure, instance-level edges connect WIDs.
struct RelEnd {
  enum class Level { Kind, Instance };
  Level level = Level::Instance;
  std::uint64_t id = kNoId;  // KindId or Wid

  friend bool operator==(const RelEnd& a, const RelEnd& b) {
    return a.level == b.level && a.id == b.id;
  }
};

struct SemanticRelation {
  RelationId id = kNoId;
  RelEnd child;   // child ⊆ parent
  RelEnd parent;
  Marker marker = Marker::Unmarked;
  PerspectiveId perspective = kNoId;
  // Instance edges that cross perspectives exist only through materializing
  // operators and record the E-tag that justified them (Property 2).
  EtagId backing_etag = kNoId;
};

// One step of an inclusion proof: which edge was used, between which WIDs.
struct ProofStep {
  enum class Via { Relation, Etag };
  Via via = Via::Relation;
  std::uint64_t id = kNoId;  // RelationId or EtagId
  Wid from = kNoId;
  Wid to = kNoId;
};

struct InclusionProof {
  std::vector<ProofStep> steps;
  std::vector<PerspectiveId> perspectives_crossed;
};

struct ComponentShift {
  enum class Direction { Upward, Downward };
  Wid original = kNoId;
  Wid shifted_to = kNoId;
  Direction direction = Direction::Upward;
  std::vector<ProofStep> path;
};

struct Derivation {
  Wid base = kNoId;  // the explicit composite instance this derives from
  std::vector<ComponentShift> shifts;
};

// Canonical memo key: "base:<wid>;<orig>-><tgt>,..." (shifts sorted by orig).
std::string derivation_key(const Derivation& d);

struct WTagInstance {
  Wid wid = kNoId;
  KindId kind = kNoId;
  ShadowId shadow = kNoId;  // kNoId for derived instances (no data-space twin)
  bool derived = false;
  std::optional<Derivation> derivation;
};

// ---------------------------------------------------------------------------
// Equivalence ledger
// ---------------------------------------------------------------------------

struct EvidenceRecord {
  enum class Kind { HumanDecision, ExternalDocument, RuleDerived, SynchronizationPoint };
  ProcessId author = kNoId;
  std::string timestamp;
  Kind kind = Kind::HumanDecision;
  std::string body;
  std::string external_ref;
};

enum class EtagKind { Strong, Weak };

// Weak E-tags are directed: a's meaning is included in b's (a ⊆ b).
// Strong E-tags are one record interpreted symmetrically.
struct ETag {
  EtagId id = kNoId;
  Wid a = kNoId;
  Wid b = kNoId;
  EtagKind kind = EtagKind::Strong;
  std::vector<EvidenceRecord> evidence;  // non-empty at creation
  bool revoked = false;
  std::string revocation_reason;
};

// ---------------------------------------------------------------------------
// Simulated schemas and provenance
// ---------------------------------------------------------------------------

struct SchemaColumn {
  KindId kind = kNoId;
  PtagId ptag = kNoId;  // functions like a domain
};

struct SimulatedSchema {
  SchemaId id = kNoId;
  PerspectiveId perspective = kNoId;
  std::string name;
  KindId row_kind = kNoId;
  std::vector<SchemaColumn> columns;
  KindId key_kind = kNoId;  // optional; feeds require one
};

struct BusinessRule {
  RuleId id = kNoId;
  std::string text;
};

struct ProcessRecord {
  ProcessId id = kNoId;
  std::string name;
  std::vector<BusinessRule> rules;
};

const char* marker_name(Marker m);
std::optional<Marker> marker_from_name(std::string_view s);
const char* evidence_kind_name(EvidenceRecord::Kind k);

}  // namespace shadow
