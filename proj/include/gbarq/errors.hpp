#pragma once

#include <stdexcept>
#include <string>

namespace gbarq {

// Thin subclasses so callers can tell module failures apart; all derive from
// the std exception that best matches the failure kind.

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& key, int line, const std::string& what)
      : std::runtime_error(format(key, line, what)), key_(key), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string msg = "config";
    if (line > 0) msg += " line " + std::to_string(line);
    if (!key.empty()) msg += " [" + key + "]";
    return msg + ": " + what;
  }

  std::string key_;
  int line_ = 0;
};

}  // namespace gbarq
