#include "shadow/model.hpp"

#include <algorithm>

#include "shadow/error.hpp"

namespace shadow {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::UntaggedShadow: return "UntaggedShadow";
    case Errc::NotFound: return "NotFound";
    case Errc::AlreadyArchived: return "AlreadyArchived";
    case Errc::NothingToRestore: return "NothingToRestore";
    case Errc::Conflict: return "Conflict";
    case Errc::Rule8Violation: return "RuleViolation(Rule8)";
    case Errc::FormatRejected: return "FormatRejected";
    case Errc::UseEquivalenceLedger: return "UseEquivalenceLedger";
    case Errc::NoConverter: return "NoConverter";
    case Errc::EvidenceRequired: return "EvidenceRequired";
    case Errc::SelfEquivalence: return "SelfEquivalence";
    case Errc::NotSameShadow: return "NotSameShadow";
    case Errc::AlreadyRevoked: return "AlreadyRevoked";
    case Errc::TemplateRequired: return "TemplateRequired";
    case Errc::MappingGap: return "MappingGap";
    case Errc::TypeError: return "TypeError";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::RuleUnknown: return "RuleUnknown";
    case Errc::UnregisteredProcess: return "UnregisteredProcess";
    case Errc::ParseError: return "ParseError";
    case Errc::NameError: return "NameError";
    case Errc::ResourceLimit: return "ResourceLimit";
    case Errc::NoTransaction: return "NoTransaction";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

const char* marker_name(Marker m) {
  switch (m) {
    case Marker::IsA: return "IS-A";
    case Marker::HasA: return "HAS-A";
    case Marker::Unmarked: return "unmarked";
  }
  return "unmarked";
}

std::optional<Marker> marker_from_name(std::string_view s) {
  if (s == "IS-A" || s == "is-a") return Marker::IsA;
  if (s == "HAS-A" || s == "has-a") return Marker::HasA;
  if (s == "unmarked" || s.empty()) return Marker::Unmarked;
  return std::nullopt;
}

const char* evidence_kind_name(EvidenceRecord::Kind k) {
  switch (k) {
    case EvidenceRecord::Kind::HumanDecision: return "human-decision";
    case EvidenceRecord::Kind::ExternalDocument: return "external-document";
    case EvidenceRecord::Kind::RuleDerived: return "rule-derived";
    case EvidenceRecord::Kind::SynchronizationPoint: return "synchronization-point";
  }
  return "human-decision";
}

std::string derivation_key(const Derivation& d) {
  std::vector<ComponentShift> shifts = d.shifts;
  std::sort(shifts.begin(), shifts.end(),
            [](const ComponentShift& a, const ComponentShift& b) { return a.original < b.original; });
  std::string key = "base:" + std::to_string(d.base);
  for (const auto& s : shifts) {
    key += ";" + std::to_string(s.original) + "->" + std::to_string(s.shifted_to);
  }
  return key;
}

}  // namespace shadow
