#pragma once

#include <stdexcept>
#include <string>

namespace hdt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  /// Short machine-readable category, e.g. "dimension".
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Index or shape outside its declared range.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

// Nonpositive value where a logarithm is required.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class BoundViolation : public Error {
 public:
  explicit BoundViolation(const std::string& what) : Error("bound_violation", what) {}
};

class IncorrectComplex : public Error {
 public:
  explicit IncorrectComplex(const std::string& what) : Error("incorrect_complex", what) {}
};

class UnsupportedFacet : public Error {
 public:
  explicit UnsupportedFacet(const std::string& what) : Error("unsupported_facet", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

}  // namespace hdt
