#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shadow/error.hpp"
#include "shadow/store.hpp"

namespace shadow {

// Single-writer command stream over a Store plus the append-only event log.
// Mutations validate against current state, build a ChangeEvent, apply it and
// append it to the log at commit. Readers take snapshot copies.
class Engine {
 public:
  // Every mutation is authored by a registered process citing one of its
  // business rules (the "who" and "why" of provenance).
  struct Ctx {
    ProcessId process = 1;  // built-in "system"
    RuleId rule = 1;        // built-in "system bootstrap"
    std::string feed_source;
  };

  Engine();                                      // in-memory log
  explicit Engine(std::filesystem::path dir);    // dir/events.jsonl, replayed
  explicit Engine(Store initial);                // scratch engine over a copy
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const Store& store() const { return store_; }
  std::shared_ptr<const Store> snapshot() const;
  const std::vector<ChangeEvent>& log() const { return log_; }

  // --- transactions ----------------------------------------------------------
  // W-tag Rule #3 is checked at the commit boundary: every shadow created in
  // the transaction must carry at least one W-tag instance. A failed commit
  // leaves the transaction open so the caller can attach tags or abort.
  void begin();
  Result<void> commit();
  void abort();
  bool in_txn() const { return txn_backup_.has_value(); }

  // --- shadow_store ops ------------------------------------------------------
  Result<ShadowId> insert_shadow(const Ctx& ctx, std::string value,
                                 std::vector<std::pair<std::string, std::string>> sub_parts = {});
  // Composite whose observables are existing shadows (combine/join results).
  Result<ShadowId> create_composite(const Ctx& ctx, std::string value,
                                    std::vector<std::pair<std::string, ShadowId>> components);
  // Adds a data-space decomposition edge from parent to an existing shadow.
  Result<void> attach_component(const Ctx& ctx, ShadowId parent, std::string role, ShadowId child);
  // Adds new sub-shadows under an existing shadow (deep decomposition).
  Result<std::vector<ShadowId>> decompose_shadow(
      const Ctx& ctx, ShadowId parent,
      std::vector<std::pair<std::string, std::string>> parts);
  Result<void> update_value(const Ctx& ctx, ShadowId id, std::string value);
  Result<void> archive_values(const Ctx& ctx, ShadowId id);
  Result<void> restore_values(const Ctx& ctx, ShadowId id);
  // Administrative physical deletion; requires explicit confirmation and
  // never touches WIDs, relations or E-tags.
  Result<void> purge_shadow(const Ctx& ctx, ShadowId id, bool confirmed);

  // --- semantic_space ops ----------------------------------------------------
  Result<ProcessId> register_process(const Ctx& ctx, std::string name,
                                     std::vector<std::string> rules);
  Result<PerspectiveId> create_perspective(const Ctx& ctx, std::string name,
                                           std::string description);
  Result<KindId> define_kind(const Ctx& ctx, PerspectiveId p, std::string name,
                             std::string description,
                             std::optional<TemplateDef> templ = std::nullopt);
  Result<void> set_template(const Ctx& ctx, KindId kind, TemplateDef templ);
  Result<PtagId> define_ptag(const Ctx& ctx, std::string name, FormatSpec format,
                             KindId required_with_kind = kNoId);
  Result<void> register_converter(const Ctx& ctx, PtagId from, PtagId to, std::string fn);
  Result<Wid> attach_wtag(const Ctx& ctx, ShadowId shadow, KindId kind);
  Result<void> attach_ptag(const Ctx& ctx, ShadowId shadow, PtagId ptag);
  // Read-only conversion; stored payload unchanged (P-tag Rule #4).
  Result<std::string> convert(ShadowId shadow, PtagId to) const;
  // Cross-perspective instance edges are rejected (UseEquivalenceLedger)
  // unless a backing E-tag justifies them (materializing operators only).
  Result<RelationId> assert_relation(const Ctx& ctx, RelEnd child, RelEnd parent, Marker marker,
                                     EtagId backing_etag = kNoId);
  Result<SchemaId> define_schema(const Ctx& ctx, PerspectiveId p, std::string name,
                                 std::string row_kind_name,
                                 std::vector<std::pair<std::string, PtagId>> columns,
                                 std::string key_column = {});
  // Row becomes a shadow with one tagged sub-shadow per present column;
  // absent column = relational null (no sub-W-tag instance).
  Result<ShadowId> load_row(const Ctx& ctx, SchemaId schema,
                            const std::vector<std::pair<std::string, std::string>>& values,
                            std::string feed_key = {});

  // --- equivalence ledger ops -------------------------------------------------
  Result<EtagId> assert_etag(const Ctx& ctx, Wid a, Wid b, EtagKind kind,
                             std::vector<EvidenceRecord> evidence);
  Result<EtagId> synchronize(const Ctx& ctx, Wid a, Wid b);
  // Mutual active weak E-tags make a strong E-tag assertable in one step,
  // recording both as evidence; never automatic.
  Result<EtagId> promote(const Ctx& ctx, Wid a, Wid b);
  Result<void> revoke_etag(const Ctx& ctx, EtagId id, std::string reason);

  // --- inference support -------------------------------------------------------
  // Materializes one derived instance (memoized by derivation key).
  Result<Wid> materialize_derived(const Ctx& ctx, KindId kind, const Derivation& d);

 private:
  Result<void> check_ctx(const Ctx& ctx) const;
  void emit(const Ctx& ctx, std::string op, nlohmann::json payload);
  Result<ShadowId> insert_tree(const Ctx& ctx, std::string value,
                               std::vector<std::pair<std::string, std::string>> sub_parts);
  Result<void> set_template_unlocked(const Ctx& ctx, KindId kind, TemplateDef templ);
  void append_to_sink(const ChangeEvent& e);

  Store store_;
  std::vector<ChangeEvent> log_;
  Seq next_seq_ = 1;

  std::optional<Store> txn_backup_;
  std::vector<ChangeEvent> txn_events_;
  std::set<ShadowId> txn_created_shadows_;
  bool txn_implicit_ = false;

  std::filesystem::path log_path_;
  std::ofstream log_file_;
  mutable std::mutex writer_mutex_;
};

}  // namespace shadow
