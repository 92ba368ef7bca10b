#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "mfa/errors.hpp"

namespace mfa {

// Static sigmoid closing the Lure loop. Both choices are odd, strictly
// increasing, bounded by 1 in magnitude and have slope in (0, 1].
enum class Nonlinearity {
  tanh,
  arctan,  // (2/pi) atan(pi y / 2), unit slope at the origin
};

inline double apply(Nonlinearity phi, double y) {
  switch (phi) {
    case Nonlinearity::tanh:
      return std::tanh(y);
    case Nonlinearity::arctan:
      return 2.0 / std::numbers::pi * std::atan(std::numbers::pi / 2.0 * y);
  }
  return 0.0;
}

inline double slope(Nonlinearity phi, double y) {
  switch (phi) {
    case Nonlinearity::tanh: {
      const double c = std::cosh(y);
      return 1.0 / (c * c);
    }
    case Nonlinearity::arctan: {
      const double u = std::numbers::pi / 2.0 * y;
      return 1.0 / (1.0 + u * u);
    }
  }
  return 0.0;
}

inline std::string_view to_string(Nonlinearity phi) {
  return phi == Nonlinearity::tanh ? "tanh" : "arctan";
}

inline Nonlinearity parse_nonlinearity(std::string_view name) {
  if (name == "tanh") return Nonlinearity::tanh;
  if (name == "arctan") return Nonlinearity::arctan;
  throw InvalidParameter("unknown nonlinearity '" + std::string(name) + "'");
}

}  // namespace mfa
