#pragma once

#include <cstdint>

namespace shadow {

// All identifiers are store-local, allocated from 1, monotone, never reused.
using ShadowId = std::uint64_t;
using Wid = std::uint64_t;  // W-tag instance identifier
using PerspectiveId = std::uint64_t;
using KindId = std::uint64_t;
using PtagId = std::uint64_t;
using RelationId = std::uint64_t;
using EtagId = std::uint64_t;
using SchemaId = std::uint64_t;
using ProcessId = std::uint64_t;
using RuleId = std::uint64_t;
using Seq = std::uint64_t;

inline constexpr std::uint64_t kNoId = 0;

}  // namespace shadow
