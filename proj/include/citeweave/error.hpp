// Copyright 2026 The citeweave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace citeweave {

// Broad failure classes. Values line up with the CLI exit codes and the
// C API status codes so the mapping stays mechanical.
enum class ErrorKind {
  kData = 1,      // malformed input or invariant violation
  kUsage = 2,     // bad arguments or configuration
  kProvider = 3,  // provider / transport failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// JSON / binary decoding failure. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(ErrorKind::kData,
              line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

// Citation tag / framing grammar violations.
class CodecError : public Error {
 public:
  explicit CodecError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& role, const std::string& what)
      : Error(ErrorKind::kProvider, role + " provider: " + what), role_(role) {}

  const std::string& role() const noexcept { return role_; }

 private:
  std::string role_;
};

}  // namespace citeweave
