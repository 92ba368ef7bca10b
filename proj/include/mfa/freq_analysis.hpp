#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mfa/tf_core.hpp"

namespace mfa {

// Logarithmic frequency sweep used for every Nyquist-type minimisation.
struct FrequencyGrid {
  double omega_min = 1e-3;
  double omega_max = 1e3;
  int n_points = 2000;
  // Relative tolerance (in omega) of the golden-section refinement.
  double refinement_tol = 1e-9;

  void validate() const;
  std::vector<double> samples() const;
};

// Three decades either side of the amplifier's corner frequencies.
FrequencyGrid default_grid(const AmplifierParams& params);
// Three decades either side of the nonzero pole/zero magnitudes of g(s - lambda).
FrequencyGrid default_grid(const RationalTF& g, double lambda);

struct RealPartMinimum {
  double min_re = 0.0;
  // +infinity when the minimum is the high-frequency limit.
  double omega = 0.0;
};

// min over omega >= 0 of Re g(j omega - lambda), including omega = 0 and the
// omega -> infinity limit. Throws NumericalError("pole on shifted imaginary
// axis") if some pole of g has real part -lambda.
RealPartMinimum min_real_part(const RationalTF& g, double lambda, const FrequencyGrid& grid);

// Largest gain multiplier below which the circle criterion holds, or empty
// for "unbounded" (min real part >= 0).
using CriticalGain = std::optional<double>;

// Poles of g with real part > -lambda. Throws NumericalError if a pole sits
// on the shifted axis (within 1e-9).
int count_unstable_shifted_poles(const RationalTF& g, double lambda);

// Gain bound for p-dominance at rate lambda computed from the unit-gain loop
// transfer function. Throws NumericalError("wrong shifted inertia") when the
// shifted pole count differs from p.
CriticalGain critical_gain(const RationalTF& unit_gain_tf, double lambda, int p, const FrequencyGrid& grid);
CriticalGain critical_gain(const AmplifierParams& params, double lambda, int p, const FrequencyGrid& grid);
CriticalGain critical_gain(const AmplifierParams& params, double lambda, int p);

// Midpoint of the two left-most poles, -(p_1 + p_2) / 2; leaves exactly two
// poles to the right of -lambda.
double select_rate(const AmplifierParams& params);
double select_rate(const RationalTF& g);

// tau_p / (tau_p + tau_n)
double critical_balance(double tau_p, double tau_n);

// Empty = infinite sector (passivity check).
using SectorBound = std::optional<double>;
inline constexpr double kStrictnessMargin = 1e-12;

struct DominanceCertificate {
  int p = 0;
  double lambda = 0.0;
  SectorBound sector;
  double min_re = 0.0;
  double omega_at_min = 0.0;
  CriticalGain critical_gain;
  // [0] no pole on the shifted axis, [1] p shifted-unstable poles,
  // [2] shifted Nyquist locus right of -1/K.
  std::array<bool, 3> conditions{};
  bool passed = false;
  // min_re + 1/K (or min_re for K = infinity); positive means satisfied.
  double margin = 0.0;
  std::string diagnostic;

  bool is_passivity() const { return !sector.has_value(); }
};

DominanceCertificate check_p_dominance(const RationalTF& g, double lambda, SectorBound sector, int p,
                                       const FrequencyGrid& grid);
DominanceCertificate check_p_passivity(const RationalTF& g, double lambda, int p, const FrequencyGrid& grid);

struct NyquistSample {
  double omega = 0.0;
  Complex value;
  bool near_pole = false;
};

// g(j omega - lambda) on the grid, omega ascending. Samples too close to a
// pole are flagged and carry NaN values.
std::vector<NyquistSample> nyquist_locus(const RationalTF& g, double lambda, const FrequencyGrid& grid);

}  // namespace mfa
