#include "shadow/manifest.hpp"

#include <fstream>

namespace shadow {

using nlohmann::json;

namespace {

Result<FormatSpec> format_from_manifest(const json& j) {
  FormatSpec f;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "enumeration") {
    f.kind = FormatKind::Enumeration;
    f.allowed = j.at("values").get<std::vector<std::string>>();
  } else if (kind == "date") {
    f.kind = FormatKind::DatePattern;
    f.pattern = j.at("pattern").get<std::string>();
  } else if (kind == "segments") {
    f.kind = FormatKind::Segments;
    const std::string sep = j.value("separator", "-");
    f.segments.separator = sep.empty() ? '-' : sep[0];
    for (const auto& p : j.at("parts")) {
      SegmentsSpec::Segment seg;
      const std::string cls = p.value("class", "any");
      seg.cls = cls == "digits"  ? TokenClass::Digits
                : cls == "alpha" ? TokenClass::Alpha
                : cls == "alnum" ? TokenClass::Alnum
                                 : TokenClass::Any;
      seg.len = p.value("len", 0);
      f.segments.segments.push_back(seg);
    }
  } else if (kind == "token") {
    f.kind = FormatKind::Token;
    const std::string cls = j.value("class", "any");
    f.token.cls = cls == "digits"  ? TokenClass::Digits
                  : cls == "alpha" ? TokenClass::Alpha
                  : cls == "alnum" ? TokenClass::Alnum
                                   : TokenClass::Any;
    f.token.min_len = j.value("min", 0);
    f.token.max_len = j.value("max", 0);
  } else {
    return make_error(Errc::InvalidArgument, "unknown P-tag format kind \"" + kind + "\"");
  }
  return f;
}

}  // namespace

Result<void> apply_manifest(Engine& engine, const Engine::Ctx& ctx, const json& doc) {
  if (doc.contains("processes")) {
    for (const auto& p : doc.at("processes")) {
      auto r = engine.register_process(ctx, p.at("name").get<std::string>(),
                                       p.value("rules", std::vector<std::string>{}));
      if (!r) return r.error();
    }
  }
  if (doc.contains("perspectives")) {
    for (const auto& p : doc.at("perspectives")) {
      auto r = engine.create_perspective(ctx, p.at("name").get<std::string>(),
                                         p.value("description", std::string{}));
      if (!r) return r.error();
    }
  }
  if (doc.contains("ptags")) {
    for (const auto& t : doc.at("ptags")) {
      auto format = format_from_manifest(t.at("format"));
      if (!format) return format.error();
      KindId required = kNoId;
      if (t.contains("required_with")) {
        auto kind = engine.store().kind_by_qualified(t.at("required_with").get<std::string>());
        if (!kind) {
          return make_error(Errc::NameError,
                            "required_with kind not found: " + t.at("required_with").dump());
        }
        required = *kind;
      }
      auto r = engine.define_ptag(ctx, t.at("name").get<std::string>(), *format, required);
      if (!r) return r.error();
    }
  }
  if (doc.contains("kinds")) {
    for (const auto& k : doc.at("kinds")) {
      auto p = engine.store().perspective_by_name(k.at("perspective").get<std::string>());
      if (!p) {
        return make_error(Errc::NameError, "unknown perspective in kind: " + k.dump());
      }
      auto r = engine.define_kind(ctx, *p, k.at("name").get<std::string>(),
                                  k.at("description").get<std::string>());
      if (!r) return r.error();
    }
  }
  if (doc.contains("templates")) {
    for (const auto& t : doc.at("templates")) {
      auto root = engine.store().kind_by_qualified(t.at("kind").get<std::string>());
      if (!root) return make_error(Errc::NameError, "unknown template kind: " + t.dump());
      TemplateDef templ;
      for (const auto& e : t.at("edges")) {
        auto child = engine.store().kind_by_qualified(e.at("child").get<std::string>());
        if (!child) return make_error(Errc::NameError, "unknown template child: " + e.dump());
        KindId parent = *root;
        if (e.contains("parent")) {
          auto pk = engine.store().kind_by_qualified(e.at("parent").get<std::string>());
          if (!pk) return make_error(Errc::NameError, "unknown template parent: " + e.dump());
          parent = *pk;
        }
        auto marker = marker_from_name(e.value("marker", "unmarked"));
        if (!marker) return make_error(Errc::InvalidArgument, "unknown marker: " + e.dump());
        templ.edges.push_back({*child, parent, *marker});
      }
      auto r = engine.set_template(ctx, *root, templ);
      if (!r) return r.error();
    }
  }
  if (doc.contains("schemas")) {
    for (const auto& s : doc.at("schemas")) {
      auto p = engine.store().perspective_by_name(s.at("perspective").get<std::string>());
      if (!p) return make_error(Errc::NameError, "unknown perspective in schema: " + s.dump());
      std::vector<std::pair<std::string, PtagId>> columns;
      for (const auto& c : s.at("columns")) {
        auto ptag = engine.store().ptag_by_name(c.at("ptag").get<std::string>());
        if (!ptag) return make_error(Errc::NameError, "unknown P-tag in schema: " + c.dump());
        columns.emplace_back(c.at("name").get<std::string>(), *ptag);
      }
      auto r = engine.define_schema(ctx, *p, s.at("name").get<std::string>(),
                                    s.at("row_kind").get<std::string>(), columns,
                                    s.value("key", std::string{}));
      if (!r) return r.error();
    }
  }
  if (doc.contains("converters")) {
    for (const auto& c : doc.at("converters")) {
      auto from = engine.store().ptag_by_name(c.at("from").get<std::string>());
      auto to = engine.store().ptag_by_name(c.at("to").get<std::string>());
      if (!from || !to) return make_error(Errc::NameError, "unknown P-tag in converter: " + c.dump());
      auto r = engine.register_converter(ctx, *from, *to, c.at("fn").get<std::string>());
      if (!r) return r.error();
    }
  }
  return {};
}

Result<void> apply_manifest_file(Engine& engine, const Engine::Ctx& ctx, const std::string& path) {
  std::ifstream in(path);
  if (!in) return make_error(Errc::IoError, "cannot open manifest: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& ex) {
    return make_error(Errc::ParseError, std::string("manifest is not valid JSON: ") + ex.what());
  }
  return apply_manifest(engine, ctx, doc);
}

}  // namespace shadow
