#pragma once

#include <stdexcept>
#include <string>

namespace entrate {

// Input violates a documented precondition (normalization, Hermiticity, sign).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or unreadable input file.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An unregularized inverse was requested on a (numerically) singular matrix.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every start of a multi-start solver stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace entrate
