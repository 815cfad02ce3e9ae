#pragma once

#include <stdexcept>
#include <string>

namespace bai {

// Every failure raised by the library derives from Error so the CLI can map
// the concrete type onto a stable exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document or command line.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numerical solver hit its iteration cap before meeting its tolerance.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bai
