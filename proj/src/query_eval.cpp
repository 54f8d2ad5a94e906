#include "shadow/query/eval.hpp"

#include <sstream>

namespace shadow::query {

namespace {

using algebra::ResultSet;

Result<ResultSet> eval_node(const Query& q, Engine& engine, const Engine::Ctx& ctx,
                            bool derived_default);

Result<ResultSet> eval_select(const Query& q, Engine& engine, bool derived_default) {
  algebra::SelectScope scope;
  scope.kind = q.scope_kind;
  scope.wid = q.scope_wid;
  scope.include_derived = q.include_derived.value_or(derived_default);
  return algebra::select(engine.store(), scope, q.where);
}

Result<ResultSet> eval_node(const Query& q, Engine& engine, const Engine::Ctx& ctx,
                            bool derived_default) {
  switch (q.op) {
    case Query::Op::Select:
      return eval_select(q, engine, derived_default);
    case Query::Op::Union:
    case Query::Op::Diff:
    case Query::Op::Intersect: {
      auto a = eval_node(*q.lhs, engine, ctx, derived_default);
      if (!a) return a.error();
      auto b = eval_node(*q.rhs, engine, ctx, derived_default);
      if (!b) return b.error();
      if (q.op == Query::Op::Union) return algebra::set_union(engine.store(), *a, *b);
      if (q.op == Query::Op::Diff) return algebra::set_difference(engine.store(), *a, *b);
      return algebra::set_intersect(engine.store(), *a, *b);
    }
    case Query::Op::Project: {
      algebra::SelectScope scope;
      scope.kind = q.scope_kind;
      scope.wid = q.scope_wid;
      scope.include_derived = q.include_derived.value_or(false);
      return algebra::project(engine, ctx, scope, q.where, q.target_kind, q.rules);
    }
    case Query::Op::Combine: {
      std::vector<algebra::ComponentSelection> components;
      for (const auto& comp : q.components) {
        auto sel = eval_node(*comp.selection, engine, ctx, derived_default);
        if (!sel) return sel.error();
        components.push_back({comp.role_kind, std::move(*sel)});
      }
      return algebra::combine(engine, ctx, q.target_kind, components);
    }
    case Query::Op::JoinStrong:
    case Query::Op::JoinWeak: {
      // Derived instances participate in joins by default (level-shifted
      // composites are what cross-hierarchy joins are for).
      auto a = eval_node(*q.lhs, engine, ctx, true);
      if (!a) return a.error();
      auto b = eval_node(*q.rhs, engine, ctx, true);
      if (!b) return b.error();
      algebra::JoinSide side_a{std::move(*a), q.key_a};
      algebra::JoinSide side_b{std::move(*b), q.key_b};
      if (q.op == Query::Op::JoinStrong) {
        return algebra::join_strong(engine, ctx, side_a, side_b, q.target_kind);
      }
      return algebra::join_weak(engine, ctx, side_a, side_b, q.target_kind, q.direction);
    }
  }
  return make_error(Errc::InvalidArgument, "unhandled query node");
}

// --- rendering ---------------------------------------------------------------

nlohmann::json rendering_to_json(const algebra::Rendering& r) {
  nlohmann::json j;
  j["wid"] = r.wid;
  j["kind"] = r.kind;
  if (r.shadow) j["shadow"] = *r.shadow;
  if (r.value) j["value"] = *r.value;
  if (r.archived) j["archived"] = true;
  if (r.derived) j["derived"] = true;
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : r.children) children.push_back(rendering_to_json(c));
  if (!children.empty()) j["children"] = children;
  return j;
}

std::string render_json(const ResultSet& rs) {
  nlohmann::json j;
  j["count"] = rs.items.size();
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : rs.items) {
    nlohmann::json ji;
    ji["wid"] = item.wid;
    if (item.shadow) ji["shadow"] = *item.shadow;
    nlohmann::json renderings = nlohmann::json::array();
    for (const auto& r : item.renderings) renderings.push_back(rendering_to_json(r));
    ji["renderings"] = renderings;
    nlohmann::json prov = nlohmann::json::array();
    for (const auto& p : item.provenance) {
      const char* kind = p.kind == algebra::ProvenanceRef::Kind::Relation       ? "relation"
                         : p.kind == algebra::ProvenanceRef::Kind::Etag         ? "etag"
                         : p.kind == algebra::ProvenanceRef::Kind::Derivation   ? "derivation"
                         : p.kind == algebra::ProvenanceRef::Kind::SharedShadow ? "shared-shadow"
                                                                                : "rule";
      prov.push_back({{"kind", kind}, {"id", p.id}, {"note", p.note}});
    }
    ji["provenance"] = prov;
    items.push_back(ji);
  }
  j["items"] = items;
  if (!rs.advisories.empty()) j["advisories"] = rs.advisories;
  return j.dump(2);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void render_xml_node(std::ostringstream& out, const algebra::Rendering& r, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  out << pad << "<" << r.kind << " WID=\"" << r.wid << "\"";
  if (r.archived) out << " archived=\"true\"";
  if (r.derived) out << " derived=\"true\"";
  if (r.children.empty()) {
    if (r.value && !r.value->empty()) {
      out << ">" << xml_escape(*r.value) << "</" << r.kind << ">\n";
    } else {
      out << "/>\n";
    }
    return;
  }
  out << ">";
  if (r.value && !r.value->empty()) out << xml_escape(*r.value);
  out << "\n";
  for (const auto& c : r.children) render_xml_node(out, c, indent + 1);
  out << pad << "</" << r.kind << ">\n";
}

std::string render_xml(const ResultSet& rs) {
  std::ostringstream out;
  if (rs.items.empty()) {
    out << "<result count=\"0\"/>\n";
    return out.str();
  }
  out << "<result count=\"" << rs.items.size() << "\">\n";
  for (const auto& item : rs.items) {
    for (const auto& r : item.renderings) render_xml_node(out, r, 1);
  }
  out << "</result>\n";
  return out.str();
}

void render_table_node(std::ostringstream& out, const algebra::Rendering& r, int indent) {
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ');
  out << "#" << r.wid << "  " << r.kind;
  if (r.shadow) out << "  s" << *r.shadow;
  if (r.archived) {
    out << "  [archived]";
  } else if (r.value) {
    out << "  " << *r.value;
  }
  if (r.derived) out << "  [derived]";
  out << "\n";
  for (const auto& c : r.children) render_table_node(out, c, indent + 1);
}

std::string render_table(const ResultSet& rs) {
  std::ostringstream out;
  out << "count " << rs.items.size() << "\n";
  for (const auto& item : rs.items) {
    for (const auto& r : item.renderings) render_table_node(out, r, 0);
  }
  for (const auto& a : rs.advisories) out << "advisory: " << a << "\n";
  return out.str();
}

}  // namespace

Result<ResultSet> evaluate(const Query& q, Engine& engine, const Engine::Ctx& ctx) {
  return eval_node(q, engine, ctx, false);
}

Result<RenderFormat> render_format_from_name(std::string_view name) {
  if (name == "table") return RenderFormat::Table;
  if (name == "json") return RenderFormat::Json;
  if (name == "xml-tags") return RenderFormat::XmlTags;
  return make_error(Errc::InvalidArgument, "unknown format; use table|json|xml-tags");
}

std::string render(const Store&, const algebra::ResultSet& result, RenderFormat format) {
  switch (format) {
    case RenderFormat::Table: return render_table(result);
    case RenderFormat::Json: return render_json(result);
    case RenderFormat::XmlTags: return render_xml(result);
  }
  return "";
}

}  // namespace shadow::query
