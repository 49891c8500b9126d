#pragma once

#include <stdexcept>
#include <string>

namespace dgad {

// Base for every error the library raises. Subclasses name the failure
// category so callers (and the CLI) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
  using Error::Error;
};
class ArgumentError : public Error {
  using Error::Error;
};
class CapacityError : public Error {
  using Error::Error;
};
class ShapeError : public Error {
  using Error::Error;
};
class NumericalError : public Error {
  using Error::Error;
};
class LookupError : public Error {
  using Error::Error;
};
class ConsistencyError : public Error {
  using Error::Error;
};
class FormatError : public Error {
  using Error::Error;
};
class ConfigError : public Error {
  using Error::Error;
};
class MetricError : public Error {
  using Error::Error;
};

}  // namespace dgad
