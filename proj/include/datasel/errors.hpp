#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace datasel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

  /// Same error, message prefixed with `source: `.
  ParseError with_source(const std::string& source) const {
    return ParseError(line_, source + ": " + what(), Raw{});
  }

 private:
  struct Raw {};
  ParseError(std::size_t line, const std::string& message, Raw)
      : Error(message), line_(line) {}

  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace datasel
