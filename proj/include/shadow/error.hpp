#pragma once

#include <cassert>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace shadow {

// Domain error taxonomy. Codes are stable; the CLI maps them 1:1 onto
// machine-readable diagnostics.
enum class Errc {
  UntaggedShadow,
  NotFound,
  AlreadyArchived,
  NothingToRestore,
  Conflict,
  Rule8Violation,
  FormatRejected,
  UseEquivalenceLedger,
  NoConverter,
  EvidenceRequired,
  SelfEquivalence,
  NotSameShadow,
  AlreadyRevoked,
  TemplateRequired,
  MappingGap,
  TypeError,
  UnknownKey,
  RuleUnknown,
  UnregisteredProcess,
  ParseError,
  NameError,
  ResourceLimit,
  NoTransaction,
  InvalidArgument,
  IoError,
};

const char* errc_name(Errc c);

struct Error {
  Errc code;
  std::string message;
};

inline Error make_error(Errc code, std::string message) {
  return Error{code, std::move(message)};
}

template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error error) : v_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() {
    assert(ok());
    return std::get<T>(v_);
  }
  const T& value() const {
    assert(ok());
    return std::get<T>(v_);
  }
  T& operator*() { return value(); }
  const T& operator*() const { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  const Error& error() const {
    assert(!ok());
    return std::get<Error>(v_);
  }
  Errc code() const { return error().code; }

 private:
  std::variant<T, Error> v_;
};

template <>
class [[nodiscard]] Result<void> {
 public:
  Result() = default;
  Result(Error error) : e_(std::move(error)) {}

  bool ok() const { return !e_.has_value(); }
  explicit operator bool() const { return ok(); }

  const Error& error() const {
    assert(!ok());
    return *e_;
  }
  Errc code() const { return error().code; }

 private:
  std::optional<Error> e_;
};

}  // namespace shadow
