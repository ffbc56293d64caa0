#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecgprune {

// Base class for every error this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor or layer shapes disagree; the message names both sides.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or otherwise unreadable binary input.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Model file written by an unsupported format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

// Text input that fails to parse. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Invalid configuration: unknown strategy, sparsity out of range, empty
// training set, nothing trainable, and the like.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A non-finite value showed up where it must not (training loss).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecgprune
