#pragma once

#include <string>

#include "shadow/engine.hpp"
#include "shadow/query/ast.hpp"

namespace shadow::query {

// Binds a parsed query to the algebra. Kind names are resolved against the
// store; unknown names produce NameError diagnostics listing near-matches.
Result<algebra::ResultSet> evaluate(const Query& q, Engine& engine, const Engine::Ctx& ctx);

enum class RenderFormat { Table, Json, XmlTags };
Result<RenderFormat> render_format_from_name(std::string_view name);

std::string render(const Store& store, const algebra::ResultSet& result, RenderFormat format);

}  // namespace shadow::query
