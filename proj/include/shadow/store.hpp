#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shadow/event.hpp"
#include "shadow/model.hpp"

namespace shadow {

// In-memory state reconstructed from the event log. Store is a value type:
// copies are independent snapshots safe to read from any thread. All
// validation happens before an event is produced; apply() trusts the log.
class Store {
 public:
  Store();

  // --- state transition -----------------------------------------------------
  void apply(const ChangeEvent& event);

  // Canonical JSON of all tables and counters; byte-identical states compare
  // equal as strings.
  std::string serialize() const;

  // --- data space -----------------------------------------------------------
  const Shadow* shadow(ShadowId id) const;
  std::vector<ShadowId> shadow_ids() const;

  // --- semantic space -------------------------------------------------------
  const Perspective* perspective(PerspectiveId id) const;
  const WTagKind* kind(KindId id) const;
  const WTagInstance* instance(Wid wid) const;
  const SemanticRelation* relation(RelationId id) const;
  const PTag* ptag(PtagId id) const;
  const ETag* etag(EtagId id) const;
  const SimulatedSchema* schema(SchemaId id) const;
  const ProcessRecord* process(ProcessId id) const;

  std::optional<PerspectiveId> perspective_by_name(std::string_view name) const;
  std::optional<KindId> kind_by_name(PerspectiveId p, std::string_view name) const;
  // "P1:Customer_ID" form used across the query language and CLI.
  std::optional<KindId> kind_by_qualified(std::string_view qualified) const;
  std::string qualified_kind_name(KindId id) const;
  std::optional<PtagId> ptag_by_name(std::string_view name) const;
  std::optional<SchemaId> schema_by_name(std::string_view name) const;
  std::optional<ProcessId> process_by_name(std::string_view name) const;

  std::vector<std::string> kind_name_candidates(std::string_view qualified, std::size_t max) const;

  const std::vector<Wid>& instances_of_kind(KindId id) const;
  const std::vector<Wid>& wids_on_shadow(ShadowId id) const;
  // Relations where the given instance end appears.
  const std::vector<RelationId>& relations_of_child(const RelEnd& e) const;
  const std::vector<RelationId>& relations_of_parent(const RelEnd& e) const;
  const std::vector<EtagId>& etags_of(Wid wid) const;
  std::optional<Wid> derived_by_key(const std::string& key) const;
  PerspectiveId perspective_of_instance(Wid wid) const;
  std::optional<PtagId> required_ptag_of_kind(KindId id) const;
  std::optional<std::string> converter_between(PtagId from, PtagId to) const;

  // Feed key bookkeeping: per (schema, upstream key), the history of row
  // shadows; back() is current.
  const std::vector<ShadowId>* feed_rows(SchemaId schema, const std::string& key) const;

  // Active strong E-tag directly linking two WIDs, if any.
  std::optional<EtagId> strong_link(Wid a, Wid b) const;
  // Active weak E-tag stating a ⊆ b, if any.
  std::optional<EtagId> weak_link(Wid a, Wid b) const;

  // Allocation probes (next ids) used by the engine when building events.
  ShadowId peek_shadow_id() const { return next_shadow_; }
  Wid peek_wid() const { return next_wid_; }
  PerspectiveId peek_perspective_id() const { return next_perspective_; }
  KindId peek_kind_id() const { return next_kind_; }
  PtagId peek_ptag_id() const { return next_ptag_; }
  RelationId peek_relation_id() const { return next_relation_; }
  EtagId peek_etag_id() const { return next_etag_; }
  SchemaId peek_schema_id() const { return next_schema_; }
  ProcessId peek_process_id() const { return next_process_; }

  const std::map<ShadowId, Shadow>& shadows() const { return shadows_; }
  const std::map<PerspectiveId, Perspective>& perspectives() const { return perspectives_; }
  const std::map<KindId, WTagKind>& kinds() const { return kinds_; }
  const std::map<Wid, WTagInstance>& instances() const { return instances_; }
  const std::map<RelationId, SemanticRelation>& relations() const { return relations_; }
  const std::map<PtagId, PTag>& ptags() const { return ptags_; }
  const std::map<EtagId, ETag>& etags() const { return etags_; }
  const std::map<SchemaId, SimulatedSchema>& schemas() const { return schemas_; }
  const std::map<ProcessId, ProcessRecord>& processes() const { return processes_; }
  const std::vector<PtagId>& ptags_on_shadow(ShadowId id) const;

 private:
  void index_instance(const WTagInstance& inst);
  void index_relation(const SemanticRelation& rel);
  void index_etag(const ETag& etag);

  // op handlers
  void apply_register_process(const nlohmann::json& p);
  void apply_create_perspective(const nlohmann::json& p);
  void apply_define_kind(const nlohmann::json& p);
  void apply_set_template(const nlohmann::json& p);
  void apply_define_ptag(const nlohmann::json& p);
  void apply_register_converter(const nlohmann::json& p);
  void apply_insert_shadow(const nlohmann::json& p);
  void apply_create_composite(const nlohmann::json& p);
  void apply_attach_component(const nlohmann::json& p);
  void apply_update_value(const nlohmann::json& p);
  void apply_archive_values(const nlohmann::json& p);
  void apply_restore_values(const nlohmann::json& p);
  void apply_purge_shadow(const nlohmann::json& p);
  void apply_attach_wtag(const nlohmann::json& p);
  void apply_attach_derived(const nlohmann::json& p);
  void apply_attach_ptag(const nlohmann::json& p);
  void apply_assert_relation(const nlohmann::json& p);
  void apply_define_schema(const nlohmann::json& p);
  void apply_note_feed_key(const nlohmann::json& p);
  void apply_assert_etag(const nlohmann::json& p);
  void apply_revoke_etag(const nlohmann::json& p);

  std::map<ShadowId, Shadow> shadows_;
  std::map<PerspectiveId, Perspective> perspectives_;
  std::map<KindId, WTagKind> kinds_;
  std::map<Wid, WTagInstance> instances_;
  std::map<RelationId, SemanticRelation> relations_;
  std::map<PtagId, PTag> ptags_;
  std::map<EtagId, ETag> etags_;
  std::map<SchemaId, SimulatedSchema> schemas_;
  std::map<ProcessId, ProcessRecord> processes_;
  std::map<ShadowId, std::vector<PtagId>> shadow_ptags_;
  std::map<std::pair<PtagId, PtagId>, std::string> converters_;
  std::map<SchemaId, std::map<std::string, std::vector<ShadowId>>> feed_rows_;

  // derived indexes (not serialized)
  std::map<KindId, std::vector<Wid>> kind_instances_;
  std::map<ShadowId, std::vector<Wid>> shadow_wids_;
  std::map<std::pair<int, std::uint64_t>, std::vector<RelationId>> child_rels_;
  std::map<std::pair<int, std::uint64_t>, std::vector<RelationId>> parent_rels_;
  std::map<Wid, std::vector<EtagId>> wid_etags_;
  std::map<std::string, Wid> derivation_index_;

  ShadowId next_shadow_ = 1;
  Wid next_wid_ = 1;
  PerspectiveId next_perspective_ = 1;
  KindId next_kind_ = 1;
  PtagId next_ptag_ = 1;
  RelationId next_relation_ = 1;
  EtagId next_etag_ = 1;
  SchemaId next_schema_ = 1;
  ProcessId next_process_ = 1;
};

}  // namespace shadow
