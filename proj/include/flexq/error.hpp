#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flexq {

// Base of every error raised by the engine. Each subclass maps to one
// failure family so that callers (CLI exit codes, HTTP status) can dispatch
// on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range or inconsistent numeric parameters (trapezoid ordering,
// sample percentage, threshold, confidence).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Reference to a table, column or label that does not exist.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Attribute exists but is not numeric.
class TypeError : public Error {
 public:
  using Error::Error;
};

// Empty relation or otherwise undefined value range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// A pipeline step ran before the step it depends on (e.g. querying before
// the knowledge base was built).
class PipelineError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries 1-based line and an optional field name.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::string field = {})
      : Error(format(message, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& message, std::size_t line,
                            const std::string& field) {
    std::string out = "line " + std::to_string(line);
    if (!field.empty()) out += ", field '" + field + "'";
    return out + ": " + message;
  }

  std::size_t line_;
  std::string field_;
};

// Query text does not match the grammar. Position is a 0-based byte offset.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position)
      : Error("at position " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace flexq
