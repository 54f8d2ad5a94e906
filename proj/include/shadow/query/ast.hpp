#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shadow/algebra.hpp"

namespace shadow::query {

struct Query;
using QueryPtr = std::shared_ptr<Query>;

// One node per operator. Non-select nodes reuse lhs/rhs for their operands.
struct Query {
  enum class Op { Select, Union, Diff, Intersect, Project, Combine, JoinStrong, JoinWeak };

  Op op = Op::Select;

  // Select (also the source scope of Project)
  std::optional<std::string> scope_kind;  // "P1:Kind"; nullopt with scope_wid unset = ALL
  std::optional<Wid> scope_wid;
  algebra::PredicatePtr where;
  std::optional<bool> include_derived;    // WITH/WITHOUT DERIVED; unset = context default

  // Set operators and join operands
  QueryPtr lhs;
  QueryPtr rhs;

  // Project / Combine / Join target
  std::string target_kind;  // qualified
  std::vector<algebra::ProjectionRule> rules;

  struct Component {
    std::string role_kind;  // qualified
    QueryPtr selection;
  };
  std::vector<Component> components;

  // Join key kinds and weak direction
  std::string key_a;
  std::string key_b;
  algebra::JoinDirection direction = algebra::JoinDirection::Forward;
};

bool query_equal(const Query& a, const Query& b);

}  // namespace shadow::query
