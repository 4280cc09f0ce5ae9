#pragma once

#include <stdexcept>
#include <string>

namespace statedex {

/// Base of every error the engine raises. `code()` is a stable
/// machine-readable identifier used by the HTTP layer and the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class MeshError : public Error {
 public:
  explicit MeshError(const std::string& message) : Error("invalid_mesh", message) {}
};

class TokenError : public Error {
 public:
  explicit TokenError(const std::string& message) : Error("invalid_token", message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("malformed_document", message) {}
};

class UnknownMapError : public Error {
 public:
  explicit UnknownMapError(const std::string& map)
      : Error("unknown_map", "unknown map '" + map + "'"), map_(map) {}

  const std::string& map() const noexcept { return map_; }

 private:
  std::string map_;
};

/// A query that is well-formed JSON but cannot be executed as written.
class QueryError : public Error {
 public:
  using Error::Error;
};

}  // namespace statedex
