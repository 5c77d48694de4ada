#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace delcheck {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Relation endpoint, valuation key or designated element outside its carrier,
/// duplicate identifiers, complementary postconditions and the like.
class StructuralError : public Error {
 public:
  using Error::Error;
};

}  // namespace delcheck
