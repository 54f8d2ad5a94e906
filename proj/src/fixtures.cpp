#include "shadow/fixtures.hpp"

#include "shadow/feed.hpp"
#include "shadow/manifest.hpp"

namespace shadow {

using nlohmann::json;

namespace {

// Everything the ECID corpus needs declared up front: perspectives, P-tags,
// simulated schemas and the target structures for the worked joins.
const char* kEcidManifest = R"json(
{
  "processes": [
    {"name": "p1_loader", "rules": ["load legal entity-based ECID from provider B nightly"]},
    {"name": "p2_loader", "rules": ["load location-based ECID from provider G nightly"]},
    {"name": "p3_loader", "rules": ["load contract-based ECID from provider W nightly"]},
    {"name": "p4_loader", "rules": ["load integrated billing accounts weekly"]},
    {"name": "integrator", "rules": [
      "declare enterprise-customer equivalences with reviewed evidence",
      "revoke equivalences whose evidence became invalid",
      "materialize cross-perspective joins for billing reports"
    ]}
  ],
  "perspectives": [
    {"name": "P1", "description": "legal entity-based ECID from service provider B"},
    {"name": "P2", "description": "location-based ECID from service provider G"},
    {"name": "P3", "description": "contract-based ECID from service provider W"},
    {"name": "P4", "description": "integrated billing accounts across providers"},
    {"name": "INT", "description": "integration workspace for cross-perspective structures"}
  ],
  "ptags": [
    {"name": "id_digits", "format": {"kind": "token", "class": "digits", "min": 1, "max": 12}},
    {"name": "free_text", "format": {"kind": "token", "class": "any", "min": 0, "max": 0}},
    {"name": "status_p1", "format": {"kind": "enumeration", "values": ["A", "P", "D", "I"]}},
    {"name": "country_code", "format": {"kind": "token", "class": "alpha", "min": 2, "max": 2}},
    {"name": "contract_num", "format": {"kind": "segments", "separator": "-",
      "parts": [{"class": "digits", "len": 5}, {"class": "digits", "len": 6}]}},
    {"name": "date_iso", "format": {"kind": "date", "pattern": "YYYY-MM-DD"}},
    {"name": "date_us", "format": {"kind": "date", "pattern": "MM/DD/YYYY"}},
    {"name": "phone_nanp", "format": {"kind": "segments", "separator": "-",
      "parts": [{"class": "digits", "len": 3}, {"class": "digits", "len": 3}, {"class": "digits", "len": 4}]}},
    {"name": "status_p4", "format": {"kind": "enumeration", "values": ["A", "I"]}},
    {"name": "acct_type", "format": {"kind": "enumeration", "values": ["PB", "WR"]}}
  ],
  "schemas": [
    {"perspective": "P1", "name": "legal_ecid", "row_kind": "Legal_entity_based_ECID",
     "key": "Customer_ID",
     "columns": [
       {"name": "Customer_ID", "ptag": "id_digits"},
       {"name": "Name", "ptag": "free_text"},
       {"name": "Status", "ptag": "status_p1"},
       {"name": "Country", "ptag": "country_code"},
       {"name": "Parent", "ptag": "id_digits"}
     ]},
    {"perspective": "P2", "name": "location_ecid", "row_kind": "Location_based_ECID",
     "key": "Customer",
     "columns": [
       {"name": "Customer", "ptag": "id_digits"},
       {"name": "Line1", "ptag": "free_text"},
       {"name": "Line2", "ptag": "free_text"},
       {"name": "Line3", "ptag": "free_text"},
       {"name": "State", "ptag": "free_text"}
     ]},
    {"perspective": "P2", "name": "ecid_group", "row_kind": "ECID_Group",
     "key": "Group_ID",
     "columns": [
       {"name": "Group_ID", "ptag": "id_digits"},
       {"name": "Group_Name", "ptag": "free_text"},
       {"name": "Bill_Address", "ptag": "free_text"}
     ]},
    {"perspective": "P2", "name": "group_map", "row_kind": "Group_Map",
     "key": "Map_OID",
     "columns": [
       {"name": "Map_OID", "ptag": "id_digits"},
       {"name": "Group_ID", "ptag": "id_digits"},
       {"name": "Customer", "ptag": "id_digits"}
     ]},
    {"perspective": "P3", "name": "contract_ecid", "row_kind": "Contract_based_ECID",
     "key": "EC_Num",
     "columns": [
       {"name": "EC_Num", "ptag": "contract_num"},
       {"name": "Product", "ptag": "free_text"},
       {"name": "Enterprise", "ptag": "free_text"},
       {"name": "Expiration_Date", "ptag": "date_iso"}
     ]},
    {"perspective": "P3", "name": "contract_map", "row_kind": "Contract_map",
     "key": "Child_Num",
     "columns": [
       {"name": "Parent_Num", "ptag": "contract_num"},
       {"name": "Child_Num", "ptag": "contract_num"},
       {"name": "Expiration_date", "ptag": "date_iso"}
     ]},
    {"perspective": "P4", "name": "billing_account", "row_kind": "Billing_Account",
     "key": "Acct",
     "columns": [
       {"name": "Acct", "ptag": "id_digits"},
       {"name": "Customer", "ptag": "id_digits"},
       {"name": "Name", "ptag": "free_text"},
       {"name": "Status", "ptag": "status_p4"},
       {"name": "Type", "ptag": "acct_type"},
       {"name": "Service_ID", "ptag": "free_text"}
     ]}
  ],
  "converters": [
    {"from": "date_iso", "to": "date_us", "fn": "date_reformat"},
    {"from": "date_us", "to": "date_iso", "fn": "date_reformat"}
  ]
}
)json";

json upsert(const char* source, const char* schema, const char* key,
            std::initializer_list<std::pair<const char*, const char*>> fields) {
  json f = json::object();
  for (const auto& [k, v] : fields) f[k] = v;
  return {{"op", "upsert"}, {"source", source}, {"schema", schema},
          {"key", key},     {"fields", f},      {"ts", "fixture"}};
}

Result<void> feed_rows(Engine& engine, const Engine::Ctx& ctx, const std::vector<json>& events) {
  for (const json& j : events) {
    auto parsed = FeedEvent::from_json(j);
    if (!parsed) return parsed.error();
    auto outcome = apply_feed_event(engine, ctx, *parsed);
    if (!outcome) return outcome.error();
  }
  return {};
}

std::optional<Wid> row_wid_of(const Store& store, ShadowId row, KindId kind) {
  for (Wid wid : store.wids_on_shadow(row)) {
    if (store.instance(wid)->kind == kind) return wid;
  }
  return std::nullopt;
}

std::optional<ShadowId> column_shadow(const Store& store, ShadowId row, const std::string& role) {
  const Shadow* s = store.shadow(row);
  if (!s) return std::nullopt;
  for (const auto& [r, sub] : s->subs) {
    if (r == role) return sub;
  }
  return std::nullopt;
}

}  // namespace

Result<EcidFixture> build_ecid_fixture(Engine& engine) {
  EcidFixture fx;
  Engine::Ctx system{};

  auto manifest = json::parse(kEcidManifest);
  if (auto r = apply_manifest(engine, system, manifest); !r) return r.error();

  const Store& store = engine.store();
  fx.p1 = *store.perspective_by_name("P1");
  fx.p2 = *store.perspective_by_name("P2");
  fx.p3 = *store.perspective_by_name("P3");
  fx.p4 = *store.perspective_by_name("P4");
  fx.legal_schema = *store.schema_by_name("legal_ecid");
  fx.location_schema = *store.schema_by_name("location_ecid");
  fx.group_schema = *store.schema_by_name("ecid_group");
  fx.group_map_schema = *store.schema_by_name("group_map");
  fx.contract_schema = *store.schema_by_name("contract_ecid");
  fx.contract_map_schema = *store.schema_by_name("contract_map");
  fx.billing_schema = *store.schema_by_name("billing_account");
  fx.p1_loader = *store.process_by_name("p1_loader");
  fx.p2_loader = *store.process_by_name("p2_loader");
  fx.p3_loader = *store.process_by_name("p3_loader");
  fx.p4_loader = *store.process_by_name("p4_loader");
  fx.integrator = *store.process_by_name("integrator");

  const Engine::Ctx p1{fx.p1_loader, 1, "P1"};
  const Engine::Ctx p2{fx.p2_loader, 1, "P2"};
  const Engine::Ctx p3{fx.p3_loader, 1, "P3"};
  const Engine::Ctx p4{fx.p4_loader, 1, "P4"};
  const Engine::Ctx integrator{fx.integrator, 1, ""};

  // P1: the paper's row (763810 / ABC Corp / A / US) plus synthesized rows.
  if (auto r = feed_rows(engine, p1,
                         {upsert("P1", "legal_ecid", "763810",
                                 {{"Name", "ABC Corp"}, {"Status", "A"}, {"Country", "US"}}),
                          upsert("P1", "legal_ecid", "763811",
                                 {{"Name", "Delta Manufacturing"},
                                  {"Status", "A"},
                                  {"Country", "US"},
                                  {"Parent", "763810"}}),
                          upsert("P1", "legal_ecid", "763812",
                                 {{"Name", "ABC Corp Europe"},
                                  {"Status", "P"},
                                  {"Country", "DE"},
                                  {"Parent", "763810"}})});
      !r) {
    return r.error();
  }

  // P2: location rows, a billing group, and the group membership mapping.
  if (auto r = feed_rows(
          engine, p2,
          {upsert("P2", "location_ecid", "005487",
                  {{"Line1", "ABC Corporation"},
                   {"Line2", "1 Main St"},
                   {"Line3", "Springfield"},
                   {"State", "IL"}}),
           upsert("P2", "location_ecid", "005490",
                  {{"Line1", "Delta Mfg"},
                   {"Line2", "700 Oak Ave"},
                   {"Line3", "Austin"},
                   {"State", "TX"}}),
           upsert("P2", "ecid_group", "300",
                  {{"Group_Name", "ABC National"}, {"Bill_Address", "PO Box 12 Springfield IL"}}),
           upsert("P2", "group_map", "9001", {{"Group_ID", "300"}, {"Customer", "005487"}}),
           upsert("P2", "group_map", "9002", {{"Group_ID", "300"}, {"Customer", "005490"}})});
      !r) {
    return r.error();
  }

  // P3: the paper's contract plus a second one.
  if (auto r = feed_rows(engine, p3,
                         {upsert("P3", "contract_ecid", "87936-965042",
                                 {{"Product", "Voice"},
                                  {"Enterprise", "ABC Corp"},
                                  {"Expiration_Date", "2012-09-12"}}),
                          upsert("P3", "contract_ecid", "87936-965100",
                                 {{"Product", "Data"},
                                  {"Enterprise", "Delta Manufacturing"},
                                  {"Expiration_Date", "2013-01-31"}})});
      !r) {
    return r.error();
  }

  // P4: billing accounts; account 900001 carries the area-code-735 phone.
  if (auto r = feed_rows(engine, p4,
                         {upsert("P4", "billing_account", "900001",
                                 {{"Customer", "101"},
                                  {"Name", "ABC Corp"},
                                  {"Status", "A"},
                                  {"Type", "PB"},
                                  {"Service_ID", "735-888-1234"}}),
                          upsert("P4", "billing_account", "900002",
                                 {{"Customer", "102"},
                                  {"Name", "Delta Manufacturing"},
                                  {"Status", "A"},
                                  {"Type", "WR"},
                                  {"Service_ID", "CKT-4471-X"}})});
      !r) {
    return r.error();
  }

  // Resolve the worked instances.
  fx.legal_row = engine.store().feed_rows(fx.legal_schema, "763810")->back();
  fx.contract_row = engine.store().feed_rows(fx.contract_schema, "87936-965042")->back();
  fx.location_row = engine.store().feed_rows(fx.location_schema, "005487")->back();
  fx.billing_row = engine.store().feed_rows(fx.billing_schema, "900001")->back();

  const SimulatedSchema* legal = engine.store().schema(fx.legal_schema);
  const SimulatedSchema* contract = engine.store().schema(fx.contract_schema);
  const SimulatedSchema* location = engine.store().schema(fx.location_schema);
  const SimulatedSchema* billing = engine.store().schema(fx.billing_schema);

  fx.legal_row_wid = *row_wid_of(engine.store(), fx.legal_row, legal->row_kind);
  fx.contract_row_wid = *row_wid_of(engine.store(), fx.contract_row, contract->row_kind);
  fx.location_row_wid = *row_wid_of(engine.store(), fx.location_row, location->row_kind);
  fx.billing_row_wid = *row_wid_of(engine.store(), fx.billing_row, billing->row_kind);

  fx.ecnum_shadow = *column_shadow(engine.store(), fx.contract_row, "EC_Num");
  fx.ecnum_wid = *row_wid_of(engine.store(), fx.ecnum_shadow, contract->key_kind);
  fx.legal_key_wid = *row_wid_of(
      engine.store(), *column_shadow(engine.store(), fx.legal_row, "Customer_ID"),
      legal->key_kind);
  fx.location_key_wid = *row_wid_of(
      engine.store(), *column_shadow(engine.store(), fx.location_row, "Customer"),
      location->key_kind);

  // Contract_map rows: Parent_Num is attached to the very shadow that holds
  // the contract's EC_Num value 87936-965042 (primary/foreign key reading).
  const KindId map_kind = engine.store().schema(fx.contract_map_schema)->row_kind;
  const KindId parent_num_kind = *engine.store().kind_by_name(fx.p3, "Parent_Num");
  const KindId child_num_kind = *engine.store().kind_by_name(fx.p3, "Child_Num");
  const KindId exp_kind = *engine.store().kind_by_name(fx.p3, "Expiration_date");

  engine.begin();
  {
    auto parentnum = engine.attach_wtag(p3, fx.ecnum_shadow, parent_num_kind);
    if (!parentnum) return parentnum.error();
    fx.parentnum_wid = *parentnum;
    struct MapRow {
      const char* child;
      const char* expires;
    };
    for (const MapRow& row : {MapRow{"87936-965043", "2012-09-12"},
                              MapRow{"87936-965044", "2012-12-31"}}) {
      auto row_shadow = engine.insert_shadow(
          p3, "", {{"Child_Num", row.child}, {"Expiration_date", row.expires}});
      if (!row_shadow) return row_shadow.error();
      auto row_wid = engine.attach_wtag(p3, *row_shadow, map_kind);
      if (!row_wid) return row_wid.error();
      if (auto r = engine.attach_component(p3, *row_shadow, "Parent_Num", fx.ecnum_shadow); !r) {
        return r.error();
      }
      const Shadow* s = engine.store().shadow(*row_shadow);
      auto child_wid = engine.attach_wtag(p3, s->subs[0].second, child_num_kind);
      if (!child_wid) return child_wid.error();
      auto exp_wid = engine.attach_wtag(p3, s->subs[1].second, exp_kind);
      if (!exp_wid) return exp_wid.error();
      for (Wid w : {*child_wid, *exp_wid, fx.parentnum_wid}) {
        auto rel = engine.assert_relation(p3, {RelEnd::Level::Instance, w},
                                          {RelEnd::Level::Instance, *row_wid}, Marker::Unmarked);
        if (!rel) return rel.error();
      }
    }
  }
  if (auto c = engine.commit(); !c) return c.error();

  // Synchronization point: two W-tags, one shadow value 87936-965042.
  auto sync = engine.synchronize(p3, fx.ecnum_wid, fx.parentnum_wid);
  if (!sync) return sync.error();
  fx.sync_point = *sync;

  // Phone decomposition: the Service_ID shadow is also a Telephone_Number
  // whose single template decomposes into NPA / NXX / XXXX.
  auto telnum_kind = engine.define_kind(
      p4, fx.p4, "Telephone_Number",
      "service identifier read as a North American Numbering Plan phone number");
  if (!telnum_kind) return telnum_kind.error();
  auto npa_kind = engine.define_kind(p4, fx.p4, "NPA", "area code of a telephone number");
  auto nxx_kind = engine.define_kind(p4, fx.p4, "NXX", "exchange code of a telephone number");
  auto xxxx_kind = engine.define_kind(p4, fx.p4, "XXXX", "station code of a telephone number");
  if (!npa_kind || !nxx_kind || !xxxx_kind) return make_error(Errc::Conflict, "phone kinds");
  TemplateDef phone_templ;
  phone_templ.edges = {{*npa_kind, *telnum_kind, Marker::Unmarked},
                       {*nxx_kind, *telnum_kind, Marker::Unmarked},
                       {*xxxx_kind, *telnum_kind, Marker::Unmarked}};
  if (auto r = engine.set_template(p4, *telnum_kind, phone_templ); !r) return r.error();

  const ShadowId service_shadow = *column_shadow(engine.store(), fx.billing_row, "Service_ID");
  const KindId service_kind = *engine.store().kind_by_name(fx.p4, "Service_ID");
  fx.service_id_wid = *row_wid_of(engine.store(), service_shadow, service_kind);

  engine.begin();
  {
    if (auto r = engine.attach_ptag(p4, service_shadow,
                                    *engine.store().ptag_by_name("phone_nanp"));
        !r) {
      return r.error();
    }
    auto telnum = engine.attach_wtag(p4, service_shadow, *telnum_kind);
    if (!telnum) return telnum.error();
    fx.telnum_wid = *telnum;
    auto parts = engine.decompose_shadow(
        p4, service_shadow, {{"NPA", "735"}, {"NXX", "888"}, {"XXXX", "1234"}});
    if (!parts) return parts.error();
    const KindId part_kinds[3] = {*npa_kind, *nxx_kind, *xxxx_kind};
    for (std::size_t i = 0; i < 3; ++i) {
      auto wid = engine.attach_wtag(p4, (*parts)[i], part_kinds[i]);
      if (!wid) return wid.error();
      auto rel = engine.assert_relation(p4, {RelEnd::Level::Instance, *wid},
                                        {RelEnd::Level::Instance, fx.telnum_wid},
                                        Marker::Unmarked);
      if (!rel) return rel.error();
    }
  }
  if (auto c = engine.commit(); !c) return c.error();
  if (auto r = engine.synchronize(p4, fx.service_id_wid, fx.telnum_wid); !r) return r.error();

  // Declared equivalences between the worked instances.
  {
    EvidenceRecord ev;
    ev.kind = EvidenceRecord::Kind::HumanDecision;
    ev.body =
        "confirmed with the enterprise customer that contract 87936-965042 and location "
        "customer 005487 are the same enterprise";
    ev.external_ref = "crm:case-2214";
    auto etag = engine.assert_etag(integrator, fx.ecnum_wid, fx.location_key_wid,
                                   EtagKind::Strong, {ev});
    if (!etag) return etag.error();
    fx.strong_p3_p2 = *etag;
  }
  {
    EvidenceRecord ev;
    ev.kind = EvidenceRecord::Kind::ExternalDocument;
    ev.body = "contract cover sheet names legal entity 763810 as the contracting party";
    ev.external_ref = "doc:contract-87936-965042.pdf";
    auto etag =
        engine.assert_etag(integrator, fx.ecnum_wid, fx.legal_key_wid, EtagKind::Weak, {ev});
    if (!etag) return etag.error();
    fx.weak_p3_p1 = *etag;
  }

  // Target structures for the worked joins.
  {
    TemplateDef t;
    t.edges = {{contract->row_kind, kNoId, Marker::Unmarked},
               {map_kind, kNoId, Marker::Unmarked}};
    auto r = engine.define_kind(integrator, fx.p3, "Contract_join",
                                "a contract together with one of its child contract mappings",
                                t);
    if (!r) return r.error();
  }
  const PerspectiveId integration = *engine.store().perspective_by_name("INT");
  {
    TemplateDef t;
    t.edges = {{contract->row_kind, kNoId, Marker::Unmarked},
               {location->row_kind, kNoId, Marker::Unmarked}};
    auto r = engine.define_kind(integrator, integration, "Customer_bridge",
                                "one enterprise customer seen from contract and location "
                                "perspectives",
                                t);
    if (!r) return r.error();
  }
  {
    TemplateDef t;
    t.edges = {{contract->row_kind, kNoId, Marker::Unmarked},
               {legal->row_kind, kNoId, Marker::Unmarked}};
    auto r = engine.define_kind(integrator, integration, "Legal_contract_bridge",
                                "a contract aligned under its legal entity", t);
    if (!r) return r.error();
  }

  return fx;
}

}  // namespace shadow
