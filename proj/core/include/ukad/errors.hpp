#pragma once

#include <stdexcept>
#include <string>

namespace ukad {

// Input violates a file schema or a domain invariant (duplicate keys, dangling
// labels, out-of-range scores). The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `where` is "path:line" for JSON-lines files and
// "path:/json/pointer" for whole-document JSON files.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& where, const std::string& what)
      : ValidationError(where + ": " + what), where_(where) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Inconsistent or incomplete pipeline configuration. Exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while processing well-formed inputs: unreadable files, predictions
// that do not cover the labeled turns, missing vectors. Exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ukad
