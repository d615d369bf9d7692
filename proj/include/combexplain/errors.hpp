#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace combexplain {

// Base for everything the engine throws on bad input or environment.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented invariant (duplicate ids, bad kind, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A line of a text/JSONL file could not be parsed.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace combexplain
