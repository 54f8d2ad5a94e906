#include "shadow/ptag.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

namespace shadow {

namespace {

bool class_accepts(TokenClass cls, char c) {
  switch (cls) {
    case TokenClass::Digits: return std::isdigit(static_cast<unsigned char>(c)) != 0;
    case TokenClass::Alpha: return std::isalpha(static_cast<unsigned char>(c)) != 0;
    case TokenClass::Alnum: return std::isalnum(static_cast<unsigned char>(c)) != 0;
    case TokenClass::Any: return true;
  }
  return false;
}

bool token_accepts(const TokenSpec& t, std::string_view v) {
  if (v.size() < t.min_len) return false;
  if (t.max_len != 0 && v.size() > t.max_len) return false;
  return std::all_of(v.begin(), v.end(), [&](char c) { return class_accepts(t.cls, c); });
}

struct DateParts {
  int year = 0, month = 0, day = 0;
};

// Pattern is a literal string where YYYY, MM, DD mark the date fields.
bool parse_date(std::string_view pattern, std::string_view value, DateParts& out) {
  if (pattern.size() != value.size()) return false;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern.compare(i, 4, "YYYY") == 0) {
      for (std::size_t k = 0; k < 4; ++k) {
        if (!std::isdigit(static_cast<unsigned char>(value[i + k]))) return false;
        out.year = out.year * 10 + (value[i + k] - '0');
      }
      i += 4;
    } else if (pattern.compare(i, 2, "MM") == 0) {
      if (!std::isdigit(static_cast<unsigned char>(value[i])) ||
          !std::isdigit(static_cast<unsigned char>(value[i + 1]))) {
        return false;
      }
      out.month = (value[i] - '0') * 10 + (value[i + 1] - '0');
      i += 2;
    } else if (pattern.compare(i, 2, "DD") == 0) {
      if (!std::isdigit(static_cast<unsigned char>(value[i])) ||
          !std::isdigit(static_cast<unsigned char>(value[i + 1]))) {
        return false;
      }
      out.day = (value[i] - '0') * 10 + (value[i + 1] - '0');
      i += 2;
    } else {
      if (pattern[i] != value[i]) return false;
      ++i;
    }
  }
  return out.month >= 1 && out.month <= 12 && out.day >= 1 && out.day <= 31;
}

std::string emit_date(std::string_view pattern, const DateParts& d) {
  auto pad = [](int v, int width) {
    std::string s = std::to_string(v);
    while (s.size() < static_cast<std::size_t>(width)) s.insert(s.begin(), '0');
    return s;
  };
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern.compare(i, 4, "YYYY") == 0) {
      out += pad(d.year, 4);
      i += 4;
    } else if (pattern.compare(i, 2, "MM") == 0) {
      out += pad(d.month, 2);
      i += 2;
    } else if (pattern.compare(i, 2, "DD") == 0) {
      out += pad(d.day, 2);
      i += 2;
    } else {
      out += pattern[i++];
    }
  }
  return out;
}

Result<std::string> convert_identity(const FormatSpec&, const FormatSpec&, std::string_view v) {
  return std::string(v);
}

Result<std::string> convert_date_reformat(const FormatSpec& from, const FormatSpec& to,
                                          std::string_view value) {
  if (from.kind != FormatKind::DatePattern || to.kind != FormatKind::DatePattern) {
    return make_error(Errc::TypeError, "date_reformat expects date-pattern P-tags");
  }
  DateParts parts;
  if (!parse_date(from.pattern, value, parts)) {
    return make_error(Errc::FormatRejected,
                      "value \"" + std::string(value) + "\" does not match pattern " + from.pattern);
  }
  return emit_date(to.pattern, parts);
}

// Static fixture table for zip enrichment; deterministic by construction.
Result<std::string> enrich_zip(std::string_view value) {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"1 Main St Springfield IL", "62701"},
      {"700 Oak Ave Austin TX", "78701"},
      {"12 Harbor Rd Boston MA", "02110"},
  };
  if (auto it = table.find(value); it != table.end()) return it->second;
  return std::string("00000");
}

Result<std::string> enrich_upper(std::string_view value) {
  std::string out(value);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace

bool format_accepts(const FormatSpec& spec, std::string_view value) {
  switch (spec.kind) {
    case FormatKind::Enumeration:
      return std::find(spec.allowed.begin(), spec.allowed.end(), value) != spec.allowed.end();
    case FormatKind::DatePattern: {
      DateParts d;
      return parse_date(spec.pattern, value, d);
    }
    case FormatKind::Segments: {
      std::vector<std::string_view> parts;
      std::size_t start = 0;
      while (true) {
        std::size_t pos = value.find(spec.segments.separator, start);
        if (pos == std::string_view::npos) {
          parts.push_back(value.substr(start));
          break;
        }
        parts.push_back(value.substr(start, pos - start));
        start = pos + 1;
      }
      if (parts.size() != spec.segments.segments.size()) return false;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& seg = spec.segments.segments[i];
        if (seg.len != 0 && parts[i].size() != seg.len) return false;
        if (seg.len == 0 && parts[i].empty()) return false;
        if (!std::all_of(parts[i].begin(), parts[i].end(),
                         [&](char c) { return class_accepts(seg.cls, c); })) {
          return false;
        }
      }
      return true;
    }
    case FormatKind::Token:
      return token_accepts(spec.token, value);
  }
  return false;
}

bool format_ordered(const FormatSpec& spec) {
  if (spec.kind == FormatKind::DatePattern) return true;
  return spec.kind == FormatKind::Token && spec.token.cls == TokenClass::Digits;
}

Result<std::string> format_order_key(const FormatSpec& spec, std::string_view value) {
  if (!format_accepts(spec, value)) {
    return make_error(Errc::FormatRejected, "value \"" + std::string(value) + "\" outside format");
  }
  if (spec.kind == FormatKind::DatePattern) {
    DateParts d;
    parse_date(spec.pattern, value, d);
    return emit_date("YYYYMMDD", d);
  }
  if (spec.kind == FormatKind::Token && spec.token.cls == TokenClass::Digits) {
    std::string key(value);
    std::size_t nz = key.find_first_not_of('0');
    key = (nz == std::string::npos) ? "0" : key.substr(nz);
    while (key.size() < 20) key.insert(key.begin(), '0');
    return key;
  }
  return make_error(Errc::TypeError, "format has no total order");
}

ConverterFn find_converter(const std::string& name) {
  static const std::map<std::string, ConverterFn> registry = {
      {"identity", &convert_identity},
      {"date_reformat", &convert_date_reformat},
  };
  auto it = registry.find(name);
  return it == registry.end() ? nullptr : it->second;
}

EnrichFn find_enrichment(const std::string& name) {
  static const std::map<std::string, EnrichFn> registry = {
      {"ZIP", &enrich_zip},
      {"UPPER", &enrich_upper},
  };
  auto it = registry.find(name);
  return it == registry.end() ? nullptr : it->second;
}

}  // namespace shadow
