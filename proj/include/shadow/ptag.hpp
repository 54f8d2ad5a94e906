#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "shadow/error.hpp"
#include "shadow/ids.hpp"

namespace shadow {

// P-tags constrain data space only: formats, conversions, ordering.
// The format language is a small closed set of named built-ins so that
// validation stays decidable.

enum class TokenClass { Digits, Alpha, Alnum, Any };

struct TokenSpec {
  TokenClass cls = TokenClass::Any;
  std::size_t min_len = 0;
  std::size_t max_len = 0;  // 0 = unbounded
};

struct SegmentsSpec {
  struct Segment {
    TokenClass cls = TokenClass::Any;
    std::size_t len = 0;  // exact length; 0 = any non-empty
  };
  std::vector<Segment> segments;
  char separator = '-';
};

enum class FormatKind { Enumeration, DatePattern, Segments, Token };

struct FormatSpec {
  FormatKind kind = FormatKind::Token;
  std::vector<std::string> allowed;  // Enumeration
  std::string pattern;               // DatePattern: literals + YYYY/MM/DD
  SegmentsSpec segments;             // Segments
  TokenSpec token;                   // Token
};

struct PTag {
  PtagId id = kNoId;
  std::string name;
  FormatSpec format;
  KindId required_with_kind = kNoId;  // P-tag Rule #3
};

bool format_accepts(const FormatSpec& spec, std::string_view value);

// Ordered comparison (<, <=, >, >=) is defined only for formats with a
// total order: date patterns (chronological) and digit tokens (numeric).
bool format_ordered(const FormatSpec& spec);

// Key whose lexicographic order matches the format's order.
Result<std::string> format_order_key(const FormatSpec& spec, std::string_view value);

// Named converter registry (code, not store state). The store records which
// (from, to) P-tag pairs are wired to which converter name.
using ConverterFn = Result<std::string> (*)(const FormatSpec& from, const FormatSpec& to,
                                            std::string_view value);
ConverterFn find_converter(const std::string& name);

// Named enrichment registry for projection rules (payload -> payload).
// ZIP ships as a static fixture table for determinism.
using EnrichFn = Result<std::string> (*)(std::string_view value);
EnrichFn find_enrichment(const std::string& name);

}  // namespace shadow
