#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "shadow/error.hpp"
#include "shadow/query/ast.hpp"

namespace shadow::query {

// Syntax diagnostic with position and the token set that would have been
// accepted there.
struct Diagnostic {
  std::size_t line = 1;
  std::size_t column = 1;
  std::string message;
  std::vector<std::string> expected;

  std::string to_string() const;
};

struct ParseResult {
  QueryPtr query;               // null on error
  std::optional<Diagnostic> diagnostic;

  bool ok() const { return query != nullptr; }
};

ParseResult parse(std::string_view text);

// Canonical text; parse(print(q)) reproduces q for every grammar-generated AST.
std::string print(const Query& q);
std::string print(const algebra::Predicate& p);

}  // namespace shadow::query
