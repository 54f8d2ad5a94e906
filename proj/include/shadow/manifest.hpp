#pragma once

#include <string>

#include <json.hpp>

#include "shadow/engine.hpp"
#include "shadow/error.hpp"

namespace shadow {

// Declarative "semantic manifest": processes, perspectives, P-tags, kinds,
// templates, simulated schemas and converters in one JSON document.
// Applying the same manifest twice is an error only where the spec says so
// (duplicate names conflict).
Result<void> apply_manifest(Engine& engine, const Engine::Ctx& ctx, const nlohmann::json& doc);
Result<void> apply_manifest_file(Engine& engine, const Engine::Ctx& ctx, const std::string& path);

}  // namespace shadow
