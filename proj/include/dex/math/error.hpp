#pragma once

#include <stdexcept>
#include <string>

namespace dex {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition on an argument's value violated (non-unit axis, joints out of limits, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed file or message content.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ProjectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace dex
