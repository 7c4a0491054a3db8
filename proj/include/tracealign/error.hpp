#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace tracealign {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An alignment violates one of its structural invariants.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Too few traces, columns or patterns for the requested operation.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or model definitions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Two inputs that must share a source log (or alphabet) do not.
class MismatchError : public Error {
 public:
  using Error::Error;
};

/// A quantity is mathematically undefined for the given input
/// (zero variance, empty reference pair set, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// No pattern passes the frequency threshold.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

/// An internal postcondition failed; indicates a corrupt alignment.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Malformed input. `line` and `column` are 1-based; line 0 means the
/// location is given inside the message instead.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, std::size_t column,
             const std::string& message)
      : Error(line == 0 ? file + ": " + message
                        : file + ":" + std::to_string(line) + ":" +
                              std::to_string(column) + ": " + message),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace tracealign
