#include "mfa/tf_core.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPoleProximity = 1e-13;

// Parlett-Reinsch balancing restricted to powers of two, so no rounding is
// introduced. Same scheme as the classic companion-matrix root finders.
void balance(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd off = m;
  off.diagonal().setZero();
  constexpr double kGamma = 0.9;
  bool changed = true;
  int sweeps = 0;
  while (changed && sweeps++ < 100) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row = off.row(i).lpNorm<1>();
      const double col = off.col(i).lpNorm<1>();
      if (row == 0.0 || col == 0.0) continue;
      int exponent = 0;
      std::frexp(row / col, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const double scaled_col = std::ldexp(col, exponent);
      const double scaled_row = std::ldexp(row, -exponent);
      if (scaled_col + scaled_row < kGamma * (col + row)) {
        changed = true;
        off.row(i) *= std::ldexp(1.0, -exponent);
        off.col(i) *= std::ldexp(1.0, exponent);
      }
    }
  }
  off.diagonal() = m.diagonal();
  m = off;
}

double scaled_residual(const Polynomial& p, Complex z) {
  const double scale = p.magnitude_at(z);
  return scale == 0.0 ? 0.0 : std::abs(p(z)) / scale;
}

// A few Newton steps; a step is kept only if it lowers the residual, and the
// whole refinement is dropped if it wandered off towards another root.
constexpr double kMaxPolishDrift = 1e-6;

Complex polish(const Polynomial& p, const Polynomial& dp, Complex z0) {
  Complex z = z0;
  for (int it = 0; it < 8; ++it) {
    const Complex d = dp(z);
    if (d == Complex(0.0, 0.0)) break;
    const Complex next = z - p(z) / d;
    if (!(std::abs(p(next)) < std::abs(p(z)))) break;
    z = next;
  }
  return std::abs(z - z0) <= kMaxPolishDrift * std::max(1.0, std::abs(z0)) ? z : z0;
}

double polish_real(const Polynomial& p, const Polynomial& dp, double x0) {
  double x = x0;
  for (int it = 0; it < 8; ++it) {
    const double d = dp(x);
    if (d == 0.0) break;
    const double next = x - p(x) / d;
    if (!(std::abs(p(next)) < std::abs(p(x)))) break;
    x = next;
  }
  return std::abs(x - x0) <= kMaxPolishDrift * std::max(1.0, std::abs(x0)) ? x : x0;
}

bool root_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

// ---------------------------------------------------------------- Polynomial

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

Complex Polynomial::operator()(Complex s) const {
  Complex acc(0.0, 0.0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::magnitude_at(Complex s) const {
  const double r = std::abs(s);
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

Polynomial Polynomial::shifted(double lambda) const {
  // Taylor shift: coefficients of p(s - lambda) via Horner's scheme applied
  // n times (b_k <- b_k + (-lambda) b_{k+1}). The shifted coefficients are
  // alternating sums, so the accumulation runs in extended precision.
  std::vector<long double> c(coeffs_.begin(), coeffs_.end());
  const int n = static_cast<int>(c.size());
  const long double a = -static_cast<long double>(lambda);
  for (int i = 0; i + 1 < n; ++i)
    for (int k = n - 2; k >= i; --k) c[k] += a * c[k + 1];
  return Polynomial(std::vector<double>(c.begin(), c.end()));
}

Polynomial Polynomial::scaled(double c) const {
  std::vector<double> out(coeffs_);
  for (double& v : out) v *= c;
  return Polynomial(std::move(out));
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> out(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) out[i - 1] = static_cast<double>(i) * coeffs_[i];
  return Polynomial(std::move(out));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> out(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Polynomial(std::move(out));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  std::vector<double> out(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Polynomial(std::move(out));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<double> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(out));
}

// ---------------------------------------------------------------- roots

std::vector<Complex> poly_roots(const Polynomial& p, double tol) {
  if (p.degree() < 1) throw NumericalError("degenerate polynomial");
  const int n = p.degree();
  if (n > kMaxRootDegree)
    throw InvalidParameter("polynomial degree " + std::to_string(n) + " exceeds root-finder cap " +
                           std::to_string(kMaxRootDegree));

  std::vector<Complex> raw;
  raw.reserve(n);
  // Roots at the origin are split off exactly.
  std::size_t low = 0;
  while (p[low] == 0.0) {
    raw.emplace_back(0.0, 0.0);
    ++low;
  }
  const int m = n - static_cast<int>(low);
  if (m == 1) {
    raw.emplace_back(-p[low] / p[low + 1], 0.0);
  } else if (m > 1) {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    companion.diagonal(-1).setOnes();
    const double lead = p.leading();
    for (int i = 0; i < m; ++i) companion(i, m - 1) = -p[low + i] / lead;
    balance(companion);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalError("companion eigenvalue iteration failed");
    for (int i = 0; i < m; ++i) raw.push_back(solver.eigenvalues()[i]);
  }

  const Polynomial dp = p.derivative();
  std::vector<Complex> roots;
  roots.reserve(n);
  std::vector<Complex> upper;  // one representative per conjugate pair
  for (const Complex& z : raw) {
    if (z.imag() == 0.0) {
      roots.emplace_back(polish_real(p, dp, z.real()), 0.0);
    } else if (z.imag() > 0.0) {
      upper.push_back(polish(p, dp, z));
    }
  }
  for (const Complex& z : upper) {
    const Complex zz(z.real(), std::abs(z.imag()));
    roots.push_back(zz);
    roots.push_back(std::conj(zz));
  }
  // Eigen returns exact conjugate pairs; guard the count anyway.
  if (static_cast<int>(roots.size()) != n) throw NumericalError("unpaired complex roots");

  for (const Complex& z : roots) {
    if (scaled_residual(p, z) > tol) throw NumericalError("root residual above tolerance");
  }
  std::sort(roots.begin(), roots.end(), root_less);
  return roots;
}

Polynomial poly_from_roots(std::span<const Complex> roots) {
  std::vector<Complex> acc{Complex(1.0, 0.0)};
  for (const Complex& r : roots) {
    std::vector<Complex> next(acc.size() + 1, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i + 1] += acc[i];
      next[i] -= r * acc[i];
    }
    acc = std::move(next);
  }
  std::vector<double> real(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) real[i] = acc[i].real();
  return Polynomial(std::move(real));
}

// ---------------------------------------------------------------- RationalTF

RationalTF::RationalTF(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw InvalidParameter("transfer function denominator is the zero polynomial");
  if (num_.degree() > den_.degree()) throw InvalidParameter("improper transfer function");
}

double RationalTF::high_frequency_gain() const {
  if (num_.degree() < den_.degree()) return 0.0;
  return num_.leading() / den_.leading();
}

Complex RationalTF::operator()(Complex s) const {
  const Complex d = den_(s);
  if (std::abs(d) <= kPoleProximity * den_.magnitude_at(s)) throw NumericalError("pole proximity");
  return num_(s) / d;
}

RationalTF RationalTF::shifted(double lambda) const {
  if (lambda == 0.0) return *this;
  return RationalTF(num_.shifted(lambda), den_.shifted(lambda));
}

RationalTF RationalTF::scaled(double k) const { return RationalTF(num_.scaled(k), den_); }

std::vector<Complex> RationalTF::zeros() const {
  if (num_.degree() < 1) return {};
  return poly_roots(num_);
}

RationalTF RationalTF::cancel(double tol) const {
  if (num_.degree() < 1 || den_.degree() < 1) return *this;
  std::vector<Complex> z = zeros();
  std::vector<Complex> p = poles();
  std::vector<bool> z_used(z.size(), false);
  std::vector<Complex> kept_poles;
  for (const Complex& pole : p) {
    bool matched = false;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!z_used[i] && std::abs(z[i] - pole) <= tol * std::max(1.0, std::abs(pole))) {
        z_used[i] = true;
        matched = true;
        break;
      }
    }
    if (!matched) kept_poles.push_back(pole);
  }
  std::vector<Complex> kept_zeros;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (!z_used[i]) kept_zeros.push_back(z[i]);
  const Polynomial n = poly_from_roots(kept_zeros).scaled(num_.leading());
  const Polynomial d = poly_from_roots(kept_poles).scaled(den_.leading());
  return RationalTF(n, d);
}

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
  return RationalTF(a.num_ * b.num_, a.den_ * b.den_);
}

// ---------------------------------------------------------------- amplifier

void AmplifierParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(tau_l) || !positive(tau_p) || !positive(tau_n))
    throw InvalidParameter("time constants must be finite and positive");
  if (!(tau_p < tau_n)) throw InvalidParameter("requires tau_p < tau_n (time-scale separation)");
  if (tau_l == tau_p || tau_l == tau_n) throw InvalidParameter("requires tau_l distinct from tau_p and tau_n");
  if (!std::isfinite(k) || k < 0.0) throw InvalidParameter("requires gain k >= 0");
  if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0) throw InvalidParameter("requires balance beta in [0, 1]");
}

RationalTF mixed_amplifier_tf(const AmplifierParams& params) {
  params.validate();
  const double b1 = params.beta * (params.tau_n + params.tau_p) - params.tau_p;
  const double b0 = 2.0 * params.beta - 1.0;
  Polynomial num({-params.k * b0, -params.k * b1});
  Polynomial den = Polynomial::lag(params.tau_l) * Polynomial::lag(params.tau_p) * Polynomial::lag(params.tau_n);
  return RationalTF(std::move(num), std::move(den));
}

ZeroLocation mixed_amplifier_zero(const AmplifierParams& params) {
  params.validate();
  if (params.k <= 0.0) throw InvalidParameter("zero location requires k > 0");
  const double sum = params.tau_p + params.tau_n;
  const double b1 = params.beta * sum - params.tau_p;
  if (std::abs(b1) <= 8.0 * kEps * sum) return {};
  return {(1.0 - 2.0 * params.beta) / b1};
}

}  // namespace mfa
