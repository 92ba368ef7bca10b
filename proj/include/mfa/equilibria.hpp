#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfa/freq_analysis.hpp"
#include "mfa/sim.hpp"

namespace mfa {

enum class Stability { stable, unstable, marginal };
std::string_view to_string(Stability s);

struct Equilibrium {
  double y_star = 0.0;
  Eigen::VectorXd state;
  std::vector<Complex> eigenvalues;
  Stability stability = Stability::stable;
  // Root of the scalar equation is (numerically) a double root.
  bool tangent = false;
};

// g0 = k (2 beta - 1), the slope parameter of phi(y) = r + y / g0.
double dc_loop_gain(const AmplifierParams& params);

// Real solutions y of y = g (phi(y) - r), sorted ascending. Scan over
// |y| <= |g| (1 + |r|) + 1 followed by bisection; tangencies are reported
// once with tangent = true.
struct ScalarRoot {
  double y = 0.0;
  bool tangent = false;
};
std::vector<ScalarRoot> solve_scalar_equilibria(double g, double r, Nonlinearity phi);

// Attach the linearisation to a root: eigenvalues of jac sorted by real part,
// stability from classify_stability (marginal for tangencies).
Equilibrium make_equilibrium(const ScalarRoot& root, Eigen::VectorXd state, const Eigen::MatrixXd& jac);

// Steady states of the amplifier: (x, x, x) with x = r - phi(y*).
std::vector<Equilibrium> find_equilibria(const AmplifierParams& params, double r);
// Any Lure realisation with invertible A: y* solves y = (c A^-1 b)(phi(y) - r)
// and x* = -A^-1 b (r - phi(y*)).
std::vector<Equilibrium> find_equilibria(const StateSpace& system, double r);

Eigen::Matrix3d jacobian_at(const AmplifierParams& params, double y_star);

Stability classify_stability(const std::vector<Complex>& eigenvalues, double tol_margin = 1e-8);

enum class Regime { ZeroDominantStable, TwoDominantOscillation, TwoDominantMultistable, Unclassified };
std::string_view to_string(Regime r);
Regime parse_regime(std::string_view name);

struct RegimeClassification {
  Regime regime = Regime::Unclassified;
  CriticalGain k0_bar;
  CriticalGain k2_bar;
  double lambda = 0.0;
  std::vector<Equilibrium> equilibria;
  std::string reason;

  int n_unstable() const;
};

// Certificate data precomputed for one balance value; the critical gains do
// not depend on k, so a map column shares them.
struct BalanceCertificates {
  CriticalGain k0_bar;
  CriticalGain k2_bar;
  // Set when lambda does not give shifted inertia 2.
  std::string k2_failure;
};
BalanceCertificates balance_certificates(const AmplifierParams& params, double lambda);
BalanceCertificates balance_certificates(const AmplifierParams& params, double lambda, const FrequencyGrid& grid);
// Same for any unit-gain loop transfer function.
BalanceCertificates balance_certificates(const RationalTF& unit_gain_tf, double lambda);

// Decision rule shared by all loops: k below k0_bar is 0-dominant; below
// k2_bar the equilibria decide between oscillation and multistability.
RegimeClassification classify_regime(double k, std::vector<Equilibrium> equilibria, const BalanceCertificates& certs,
                                     double lambda);

RegimeClassification classify_regime(const AmplifierParams& params, double r, double lambda);
RegimeClassification classify_regime(const AmplifierParams& params, double r, double lambda,
                                     const BalanceCertificates& certs);

struct MapSpec {
  double tau_l = 0.01;
  double tau_p = 0.1;
  double tau_n = 1.0;
  double k_min = 0.1;
  double k_max = 1000.0;
  double beta_min = 0.0;
  double beta_max = 1.0;
  int rows = 60;  // k values, log-spaced
  int cols = 60;  // beta values, linear
  double r = 0.0;
  double lambda = 50.0;
  Nonlinearity phi = Nonlinearity::tanh;

  void validate() const;
  std::vector<double> k_values() const;
  std::vector<double> beta_values() const;
};

struct MapCell {
  double k = 0.0;
  double beta = 0.0;
  RegimeClassification classification;
};

// Row-major (k outer, beta inner). jobs <= 0 picks the hardware concurrency.
std::vector<MapCell> dominance_map(const MapSpec& spec, int jobs = 0);

}  // namespace mfa
