#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfa/nonlinearity.hpp"

namespace mfa {

using Complex = std::complex<double>;

// Real polynomial with ascending coefficients, a_0 + a_1 s + ... + a_n s^n.
// Trailing zeros are stripped on construction, so the zero polynomial is the
// empty coefficient list and degree() == -1.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> ascending);
  Polynomial(std::initializer_list<double> ascending)
      : Polynomial(std::vector<double>(ascending)) {}

  static Polynomial constant(double c) { return Polynomial({c}); }
  // tau * s + 1
  static Polynomial lag(double tau) { return Polynomial({1.0, tau}); }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  std::span<const double> coeffs() const { return coeffs_; }
  // Coefficient of s^i, zero beyond the degree.
  double operator[](std::size_t i) const {
    return i < coeffs_.size() ? coeffs_[i] : 0.0;
  }
  double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }

  // Horner evaluation.
  Complex operator()(Complex s) const;
  double operator()(double s) const;

  // sum |a_i| |s|^i; the natural scale for relative residuals at s.
  double magnitude_at(Complex s) const;

  // p(s - lambda), by repeated synthetic division (Taylor shift).
  Polynomial shifted(double lambda) const;
  Polynomial scaled(double c) const;
  Polynomial derivative() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  std::vector<double> coeffs_;
};

inline constexpr int kMaxRootDegree = 32;

// All deg(p) roots of p, with multiplicity, sorted by ascending real part and
// then ascending imaginary part. Complex roots come out as exact conjugate
// pairs. Computed as eigenvalues of the balanced companion matrix and then
// Newton-polished; throws NumericalError if any scaled residual
// |p(z)| / magnitude_at(z) stays above tol.
std::vector<Complex> poly_roots(const Polynomial& p, double tol = 1e-9);

// Expand prod (s - r_i) for a conjugate-closed root list.
Polynomial poly_from_roots(std::span<const Complex> roots);

// Ratio num(s) / den(s). No implicit pole/zero cancellation is ever done.
class RationalTF {
 public:
  RationalTF(Polynomial num, Polynomial den);

  static RationalTF gain(double k) {
    return RationalTF(Polynomial::constant(k), Polynomial::constant(1.0));
  }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  bool is_strictly_proper() const { return num_.degree() < den_.degree(); }
  // Limit of g(s) as |s| -> infinity for a proper g.
  double high_frequency_gain() const;

  // Throws NumericalError("pole proximity") when |den(s)| is negligible
  // relative to the size of its terms.
  Complex operator()(Complex s) const;

  // g(s - lambda): poles and zeros move right by lambda.
  RationalTF shifted(double lambda) const;
  RationalTF scaled(double k) const;

  std::vector<Complex> poles() const { return poly_roots(den_); }
  std::vector<Complex> zeros() const;

  // Remove pole/zero pairs closer than tol. Never called by the analyses.
  RationalTF cancel(double tol) const;

  friend RationalTF operator*(const RationalTF& a, const RationalTF& b);

 private:
  Polynomial num_;
  Polynomial den_;
};

// Named wrappers matching the operations used throughout the analyses.
inline RationalTF tf_shift(const RationalTF& g, double lambda) { return g.shifted(lambda); }
inline RationalTF tf_multiply(const RationalTF& a, const RationalTF& b) { return a * b; }
inline Complex tf_eval(const RationalTF& g, Complex s) { return g(s); }

// Time constants, gain and balance of the three-lag mixed feedback loop
//   tau_l x'  = -x + u,  tau_p xp' = x - xp,  tau_n xn' = x - xn,
//   u = -phi(y) + r,     y = k (-beta xp + (1 - beta) xn).
struct AmplifierParams {
  double tau_l = 0.01;
  double tau_p = 0.1;
  double tau_n = 1.0;
  double k = 1.0;
  double beta = 0.5;
  Nonlinearity phi = Nonlinearity::tanh;

  // Throws InvalidParameter naming the violated assumption.
  void validate() const;
  AmplifierParams with_gain(double gain) const {
    AmplifierParams p = *this;
    p.k = gain;
    return p;
  }
};

// G(s, k, beta) = -k ((beta (tau_n + tau_p) - tau_p) s + 2 beta - 1)
//                 / ((tau_l s + 1)(tau_p s + 1)(tau_n s + 1))
RationalTF mixed_amplifier_tf(const AmplifierParams& params);

// Location of the finite zero of G; empty when beta sits on the critical
// balance and the numerator collapses to a constant (zero at infinity).
struct ZeroLocation {
  std::optional<double> value;
  bool is_infinite() const { return !value.has_value(); }
};

ZeroLocation mixed_amplifier_zero(const AmplifierParams& params);

}  // namespace mfa
