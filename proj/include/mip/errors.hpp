#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mip {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed map document.
class SyntaxError : public Error {
 public:
  using Error::Error;
};

// Well-formed document that breaks a map invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid map:";
    for (const auto& s : v) out += " " + s + ";";
    return out;
  }
  std::vector<std::string> violations_;
};

class IllegalAction : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class Conflict : public Error {
 public:
  using Error::Error;
};

class UnknownAgent : public Error {
 public:
  using Error::Error;
};

class UnknownMap : public Error {
 public:
  using Error::Error;
};

}  // namespace mip
