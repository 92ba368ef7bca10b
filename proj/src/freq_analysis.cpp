#include "mfa/freq_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

constexpr double kAxisTolerance = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

double shifted_real_part(const RationalTF& shifted, double omega) {
  return shifted(Complex(0.0, omega)).real();
}

void require_no_axis_pole(const RationalTF& g, double lambda) {
  if (g.den().degree() < 1) return;
  for (const Complex& p : g.poles())
    if (std::abs(p.real() + lambda) < kAxisTolerance) throw NumericalError("pole on shifted imaginary axis");
}

// Golden-section search for the minimum of Re g(j omega) over log(omega).
std::pair<double, double> refine_minimum(const RationalTF& shifted, double lo, double hi, double tol) {
  const double inv_phi = 1.0 / std::numbers::phi;
  double a = std::log(lo);
  double b = std::log(hi);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = shifted_real_part(shifted, std::exp(c));
  double fd = shifted_real_part(shifted, std::exp(d));
  // In log space, |b - a| < tol is a relative tolerance in omega.
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = shifted_real_part(shifted, std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = shifted_real_part(shifted, std::exp(d));
    }
  }
  return fc <= fd ? std::pair{std::exp(c), fc} : std::pair{std::exp(d), fd};
}

FrequencyGrid grid_around(double lo_mag, double hi_mag) {
  FrequencyGrid grid;
  grid.omega_min = 1e-3 * lo_mag;
  grid.omega_max = 1e3 * hi_mag;
  return grid;
}

}  // namespace

void FrequencyGrid::validate() const {
  if (!(omega_min > 0.0) || !(omega_max > omega_min)) throw InvalidParameter("frequency grid requires 0 < omega_min < omega_max");
  if (n_points < 2) throw InvalidParameter("frequency grid requires at least 2 points");
  if (!(refinement_tol > 0.0)) throw InvalidParameter("frequency grid requires a positive refinement tolerance");
}

std::vector<double> FrequencyGrid::samples() const {
  validate();
  std::vector<double> omega(n_points);
  const double a = std::log10(omega_min);
  const double b = std::log10(omega_max);
  for (int i = 0; i < n_points; ++i) omega[i] = std::pow(10.0, a + (b - a) * i / (n_points - 1));
  omega.front() = omega_min;
  omega.back() = omega_max;
  return omega;
}

FrequencyGrid default_grid(const AmplifierParams& params) {
  const double lo = std::min({1.0 / params.tau_l, 1.0 / params.tau_p, 1.0 / params.tau_n});
  const double hi = std::max({1.0 / params.tau_l, 1.0 / params.tau_p, 1.0 / params.tau_n});
  return grid_around(lo, hi);
}

FrequencyGrid default_grid(const RationalTF& g, double lambda) {
  std::vector<double> mags;
  auto collect = [&](const std::vector<Complex>& roots) {
    for (const Complex& r : roots) {
      const double m = std::abs(r + lambda);
      if (m > 0.0) mags.push_back(m);
    }
  };
  if (g.den().degree() >= 1) collect(g.poles());
  collect(g.zeros());
  if (mags.empty()) return grid_around(1.0, 1.0);
  const auto [lo, hi] = std::minmax_element(mags.begin(), mags.end());
  return grid_around(*lo, *hi);
}

RealPartMinimum min_real_part(const RationalTF& g, double lambda, const FrequencyGrid& grid) {
  require_no_axis_pole(g, lambda);
  const RationalTF shifted = g.shifted(lambda);
  const std::vector<double> omega = grid.samples();
  std::vector<double> re(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) re[i] = shifted_real_part(shifted, omega[i]);

  RealPartMinimum best{shifted_real_part(shifted, 0.0), 0.0};
  auto consider = [&](double w, double v) {
    if (v < best.min_re) best = {v, w};
  };
  consider(kInf, shifted.high_frequency_gain());
  consider(omega.front(), re.front());
  consider(omega.back(), re.back());
  for (std::size_t i = 1; i + 1 < omega.size(); ++i) {
    consider(omega[i], re[i]);
    if (re[i] < re[i - 1] && re[i] <= re[i + 1]) {
      const auto [w, v] = refine_minimum(shifted, omega[i - 1], omega[i + 1], grid.refinement_tol);
      consider(w, v);
    }
  }
  return best;
}

int count_unstable_shifted_poles(const RationalTF& g, double lambda) {
  if (g.den().degree() < 1) return 0;
  int count = 0;
  for (const Complex& p : g.poles()) {
    const double shifted = p.real() + lambda;
    if (std::abs(shifted) < kAxisTolerance) throw NumericalError("pole on shifted imaginary axis");
    if (shifted > 0.0) ++count;
  }
  return count;
}

CriticalGain critical_gain(const RationalTF& unit_gain_tf, double lambda, int p, const FrequencyGrid& grid) {
  if (count_unstable_shifted_poles(unit_gain_tf, lambda) != p) throw NumericalError("wrong shifted inertia");
  const RealPartMinimum m = min_real_part(unit_gain_tf, lambda, grid);
  if (m.min_re >= 0.0) return std::nullopt;
  return -1.0 / m.min_re;
}

CriticalGain critical_gain(const AmplifierParams& params, double lambda, int p, const FrequencyGrid& grid) {
  return critical_gain(mixed_amplifier_tf(params.with_gain(1.0)), lambda, p, grid);
}

CriticalGain critical_gain(const AmplifierParams& params, double lambda, int p) {
  return critical_gain(params, lambda, p, default_grid(params));
}

double select_rate(const AmplifierParams& params) {
  params.validate();
  std::array<double, 3> taus{params.tau_l, params.tau_p, params.tau_n};
  std::sort(taus.begin(), taus.end());
  return (1.0 / taus[0] + 1.0 / taus[1]) / 2.0;
}

double select_rate(const RationalTF& g) {
  std::vector<Complex> poles = g.poles();
  if (poles.size() < 2) throw InvalidParameter("rate selection needs at least two poles");
  // poles are sorted by ascending real part: the first two are left-most.
  return -(poles[0].real() + poles[1].real()) / 2.0;
}

double critical_balance(double tau_p, double tau_n) {
  if (!(tau_p > 0.0) || !(tau_p < tau_n)) throw InvalidParameter("requires 0 < tau_p < tau_n");
  return tau_p / (tau_p + tau_n);
}

DominanceCertificate check_p_dominance(const RationalTF& g, double lambda, SectorBound sector, int p,
                                       const FrequencyGrid& grid) {
  if (sector && !(*sector > 0.0)) throw InvalidParameter("sector bound K must be positive");
  DominanceCertificate cert;
  cert.p = p;
  cert.lambda = lambda;
  cert.sector = sector;

  int unstable = 0;
  try {
    unstable = count_unstable_shifted_poles(g, lambda);
    cert.conditions[0] = true;
  } catch (const NumericalError&) {
    cert.conditions = {false, false, false};
    cert.min_re = std::numeric_limits<double>::quiet_NaN();
    cert.omega_at_min = std::numeric_limits<double>::quiet_NaN();
    cert.critical_gain = std::numeric_limits<double>::quiet_NaN();
    cert.margin = std::numeric_limits<double>::quiet_NaN();
    cert.diagnostic = "pole on shifted imaginary axis";
    return cert;
  }
  cert.conditions[1] = unstable == p;

  const RealPartMinimum m = min_real_part(g, lambda, grid);
  cert.min_re = m.min_re;
  cert.omega_at_min = m.omega;
  if (m.min_re < 0.0) cert.critical_gain = -1.0 / m.min_re;

  if (sector) {
    cert.margin = m.min_re + 1.0 / *sector;
    cert.conditions[2] = cert.margin > kStrictnessMargin;
  } else {
    cert.margin = m.min_re;
    cert.conditions[2] = m.min_re >= 0.0;
  }
  cert.passed = cert.conditions[0] && cert.conditions[1] && cert.conditions[2];
  if (!cert.conditions[1])
    cert.diagnostic = "shifted transfer function has " + std::to_string(unstable) + " unstable poles, expected " +
                      std::to_string(p);
  else if (!cert.conditions[2])
    cert.diagnostic = "shifted Nyquist locus crosses the sector line";
  return cert;
}

DominanceCertificate check_p_passivity(const RationalTF& g, double lambda, int p, const FrequencyGrid& grid) {
  return check_p_dominance(g, lambda, std::nullopt, p, grid);
}

std::vector<NyquistSample> nyquist_locus(const RationalTF& g, double lambda, const FrequencyGrid& grid) {
  const RationalTF shifted = g.shifted(lambda);
  std::vector<NyquistSample> out;
  for (double w : grid.samples()) {
    NyquistSample s{w, {}, false};
    try {
      s.value = shifted(Complex(0.0, w));
    } catch (const NumericalError&) {
      s.near_pole = true;
      s.value = Complex(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace mfa
