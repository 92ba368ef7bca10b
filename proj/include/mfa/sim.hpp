#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfa/tf_core.hpp"

namespace mfa {

// Extra linear read-out of the state, e.g. the load output y_e.
struct LinearOutput {
  std::string name;
  Eigen::RowVectorXd weights;
};

// Lure system  x' = A x + input_map (r - phi(output x)),  y = output x.
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd input_map;
  Eigen::RowVectorXd output;
  Nonlinearity phi = Nonlinearity::tanh;
  std::vector<std::string> state_names;
  std::vector<LinearOutput> extra_outputs;
  // Fastest time constant of the linear part; drives the dt sanity warning.
  double fastest_time_constant = 0.0;

  int dim() const { return static_cast<int>(A.rows()); }
  void validate() const;
  // Accumulates A x row by row in column order, so embedding a system into a
  // larger one with zero coupling reproduces its arithmetic bit for bit.
  void derivative(const Eigen::VectorXd& x, double r, Eigen::VectorXd& dx) const;
  double y(const Eigen::VectorXd& x) const;
  // A - phi'(y) b c
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  // Transfer function of the linear part from u to y at s: c (sI - A)^-1 b.
  Complex transfer(Complex s) const;
};

// Right-hand side of the three-lag amplifier, written out directly.
std::array<double, 3> vector_field(const AmplifierParams& params, const std::array<double, 3>& state, double r);

// Realisation with states (x, xp, xn).
StateSpace realize(const AmplifierParams& params);

struct ScheduleSegment {
  double t_start = 0.0;
  double value = 0.0;
};

// Piecewise-constant reference r(t).
struct InputSchedule {
  std::vector<ScheduleSegment> segments{{0.0, 0.0}};

  static InputSchedule constant(double r) { return InputSchedule{{{0.0, r}}}; }
  void validate() const;
  double max_abs() const;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<std::string> state_names;
  std::vector<double> t;
  // Row-major, dim() values per sample.
  std::vector<double> data;
  std::vector<double> y;
  std::vector<double> r;
  std::vector<std::string> extra_names;
  std::vector<std::vector<double>> extra;
  InputSchedule schedule;
  std::vector<std::string> warnings;

  std::size_t size() const { return t.size(); }
  std::size_t dim() const { return state_names.size(); }
  std::span<const double> state(std::size_t i) const { return {data.data() + i * dim(), dim()}; }
  std::vector<double> component(std::size_t j) const;
  const std::vector<double>& series(const std::string& name) const;
};

// Fixed-step classical RK4. Schedule breakpoints act from the first sample at
// or after t_start; r is held constant across each step. Throws
// NumericalError("divergence at t=...") on non-finite states.
Trajectory integrate(const StateSpace& system, const Eigen::VectorXd& ic, const InputSchedule& schedule, double dt,
                     double horizon);
Trajectory integrate(const AmplifierParams& params, const std::array<double, 3>& ic, const InputSchedule& schedule,
                     double dt, double horizon);

double default_time_step(const AmplifierParams& params);

struct DetectionOptions {
  double transient_fraction = 0.5;
  double amp_threshold = 1e-3;
  int min_crossings = 5;
  double min_periods = 10.0;
};

struct OscillationReport {
  bool oscillating = false;
  double amplitude = 0.0;  // peak-to-peak over the detection window
  std::optional<double> period;
  double period_zero_crossing = 0.0;
  double period_autocorrelation = 0.0;
  // |T_zc - T_acf| / T_zc
  double agreement = 0.0;
  int crossings = 0;
};

// Mean-crossing period estimate cross-checked against the first
// autocorrelation peak. Throws NumericalError("insufficient horizon") if the
// window after the transient holds fewer than min_periods periods.
OscillationReport detect_oscillation(std::span<const double> signal, double dt, const DetectionOptions& options = {});
OscillationReport detect_oscillation(const Trajectory& traj, const DetectionOptions& options = {});

// Ultimate bound sup |state_i| <= r_max + 1 + margin over the samples after
// settle_time, for the given state indices (all states when empty).
bool boundedness_check(const Trajectory& traj, double r_max, double margin, double settle_time,
                       std::span<const int> indices = {});
// Amplifier runs: settle time 10 max(tau).
bool boundedness_check(const Trajectory& traj, const AmplifierParams& params, double r_max, double margin = 0.1);

}  // namespace mfa
