#pragma once

#include "shadow/engine.hpp"
#include "shadow/error.hpp"

namespace shadow {

// The ECID corpus (Scenario 4): four perspectives of enterprise-customer
// data, the paper's stated values verbatim (763810 / ABC Corp / A / US,
// 87936-965042, 005487, area code 735); remaining rows are synthesized
// deterministically. Deterministic byte-for-byte under SHADOW_FIXED_CLOCK.
struct EcidFixture {
  PerspectiveId p1 = kNoId, p2 = kNoId, p3 = kNoId, p4 = kNoId;
  SchemaId legal_schema = kNoId, location_schema = kNoId, group_schema = kNoId,
           group_map_schema = kNoId, contract_schema = kNoId, contract_map_schema = kNoId,
           billing_schema = kNoId;

  ProcessId p1_loader = kNoId, p2_loader = kNoId, p3_loader = kNoId, p4_loader = kNoId,
            integrator = kNoId;

  // P1 row 763810 (ABC Corp)
  ShadowId legal_row = kNoId;
  Wid legal_row_wid = kNoId, legal_key_wid = kNoId;
  // P2 row 005487
  ShadowId location_row = kNoId;
  Wid location_row_wid = kNoId, location_key_wid = kNoId;
  // P3 contract 87936-965042; the EC_Num sub-shadow also carries Parent_Num
  ShadowId contract_row = kNoId, ecnum_shadow = kNoId;
  Wid contract_row_wid = kNoId, ecnum_wid = kNoId, parentnum_wid = kNoId;
  // P4 billing account with phone 735-888-1234 decomposed as NPA/NXX/XXXX
  ShadowId billing_row = kNoId;
  Wid billing_row_wid = kNoId, service_id_wid = kNoId, telnum_wid = kNoId;

  EtagId sync_point = kNoId;  // P3:EC_Num ≅ P3:Parent_Num (same shadow)
  EtagId strong_p3_p2 = kNoId;  // 87936-965042 ↔ 005487
  EtagId weak_p3_p1 = kNoId;    // 87936-965042 ⊆ 763810
};

Result<EcidFixture> build_ecid_fixture(Engine& engine);

}  // namespace shadow
