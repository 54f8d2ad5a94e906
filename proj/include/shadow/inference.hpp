#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "shadow/engine.hpp"
#include "shadow/store.hpp"

namespace shadow {

inline constexpr std::size_t kDefaultStepCap = 10000;

// Traversals are cycle-guarded but unbounded in depth; the safety cap aborts
// with ResourceLimit, which is distinct from "does not hold".
struct InclusionOutcome {
  enum class Status { Holds, NotIncluded, ResourceLimit };
  Status status = Status::NotIncluded;
  std::optional<InclusionProof> proof;

  bool holds() const { return status == Status::Holds; }
};

// a ⊆ b via reflexivity, within-perspective relation chains, and active
// E-tags (strong both ways, weak in declared direction) where the chain
// crosses perspective boundaries.
InclusionOutcome inclusion_holds(const Store& store, Wid a, Wid b,
                                 std::size_t step_cap = kDefaultStepCap);

// Mutual-inclusion within one perspective collapses into strong-equivalence
// classes (Property 5); returns the partition over the given instances.
std::vector<std::vector<Wid>> strong_equivalence_classes(const Store& store,
                                                         const std::vector<Wid>& wids);

struct CompositionVerdict {
  enum class Kind { Entailed, DecisionRequired, NotRelated };
  Kind kind = Kind::NotRelated;
  std::optional<InclusionProof> proof;   // Entailed
  std::vector<EtagId> boundary;          // DecisionRequired: E-tags a human must re-evaluate
};

// Entailed only when a chain exists entirely within one perspective; any
// chain crossing a boundary is surfaced for human review, never auto-entailed.
CompositionVerdict check_composition(const Store& store, Wid a, Wid c,
                                     std::size_t step_cap = kDefaultStepCap);

// Pure enumeration of level shifts available to a composite instance:
// per component, every ancestor reachable via HAS-A edges (upward) and every
// descendant via IS-A edges (downward); combined shifts across components.
std::vector<Derivation> enumerate_level_shifts(const Store& store, Wid composite,
                                               std::size_t step_cap = kDefaultStepCap);

// Materializes the enumerated shifts as derived instances (fresh WIDs,
// allocated once per derivation key). Returns the WIDs, stable across reruns.
Result<std::vector<Wid>> infer_level_shift(Engine& engine, const Engine::Ctx& ctx,
                                           Wid composite);

struct PropertyReport {
  struct Entry {
    enum class Level { Pass, Advisory, Violation };
    std::string property;
    Level level = Level::Pass;
    std::string detail;
  };
  std::vector<Entry> entries;

  bool has_violation() const;
  std::string to_text() const;
};

// One entry per checkable region property. Violations are report entries,
// not exceptions; open-world properties (3, 4, 7, 8) run constructive
// witness checks on a scratch copy of the store.
PropertyReport check_properties(const Store& store);

}  // namespace shadow
