#pragma once

#include <stdexcept>
#include <string>

namespace mfa {

// Parameters violate a modelling assumption (bad input, not a numerical failure).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation could not be carried out on otherwise valid input:
// degenerate polynomials, poles on the evaluation contour, divergence, ...
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed JSON/CSV input or unreadable files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mfa
