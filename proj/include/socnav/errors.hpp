#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace socnav {

// Base error. Every failure carries a short machine-readable code and an
// optional context string (entity name, JSON path, parameter name...).
// exit_code() maps onto the CLI contract: 1 = validation/config problem,
// 2 = runtime failure.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string context = {})
      : std::runtime_error(message), code_(std::move(code)), context_(std::move(context)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }
  virtual int exit_code() const noexcept { return 2; }

 private:
  std::string code_;
  std::string context_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string context = {})
      : Error("config", message, std::move(context)) {}
  int exit_code() const noexcept override { return 1; }
};

// Malformed input document (bad JSON, schema violation).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message, std::string context = {})
      : Error("parse", message, std::move(context)) {}
  int exit_code() const noexcept override { return 1; }
};

// Structurally well-formed data violating a domain invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::string context = {})
      : Error("validation", message, std::move(context)) {}
  int exit_code() const noexcept override { return 1; }
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message, std::string context = {})
      : Error("dimension", message, std::move(context)) {}
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& message, std::string context = {})
      : Error("bounds", message, std::move(context)) {}
};

// NaN or infinity where a finite value is required.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message, std::string context = {})
      : Error("numeric", message, std::move(context)) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& message, std::string context = {})
      : Error("divergence", message, std::move(context)) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message, std::string context = {})
      : Error("io", message, std::move(context)) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& message, std::string context = {})
      : Error("generation", message, std::move(context)) {}
};

}  // namespace socnav
