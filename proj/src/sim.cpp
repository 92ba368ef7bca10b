#include "mfa/sim.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mfa/errors.hpp"

namespace mfa {

// ---------------------------------------------------------------- StateSpace

void StateSpace::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) throw InvalidParameter("state matrix must be square and non-empty");
  if (input_map.size() != n || output.size() != n) throw InvalidParameter("input/output maps do not match the state dimension");
  if (static_cast<Eigen::Index>(state_names.size()) != n) throw InvalidParameter("one name per state required");
  for (const LinearOutput& o : extra_outputs)
    if (o.weights.size() != n) throw InvalidParameter("extra output '" + o.name + "' has wrong width");
}

double StateSpace::y(const Eigen::VectorXd& x) const {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < output.size(); ++j) acc += output(j) * x(j);
  return acc;
}

void StateSpace::derivative(const Eigen::VectorXd& x, double r, Eigen::VectorXd& dx) const {
  const Eigen::Index n = A.rows();
  const double u = r - apply(phi, y(x));
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += A(i, j) * x(j);
    dx(i) = acc + input_map(i) * u;
  }
}

Eigen::MatrixXd StateSpace::jacobian(const Eigen::VectorXd& x) const {
  return A - slope(phi, y(x)) * input_map * output;
}

Complex StateSpace::transfer(Complex s) const {
  Eigen::MatrixXcd m = -A.cast<Complex>();
  m.diagonal().array() += s;
  const Eigen::VectorXcd sol = m.partialPivLu().solve(input_map.cast<Complex>());
  return (output.cast<Complex>() * sol)(0, 0);
}

std::array<double, 3> vector_field(const AmplifierParams& params, const std::array<double, 3>& state, double r) {
  const auto [x, xp, xn] = state;
  const double yv = params.k * (-params.beta * xp + (1.0 - params.beta) * xn);
  const double u = -apply(params.phi, yv) + r;
  return {(-x + u) / params.tau_l, (x - xp) / params.tau_p, (x - xn) / params.tau_n};
}

StateSpace realize(const AmplifierParams& params) {
  params.validate();
  StateSpace sys;
  sys.A = Eigen::MatrixXd::Zero(3, 3);
  sys.A(0, 0) = -1.0 / params.tau_l;
  sys.A(1, 0) = 1.0 / params.tau_p;
  sys.A(1, 1) = -1.0 / params.tau_p;
  sys.A(2, 0) = 1.0 / params.tau_n;
  sys.A(2, 2) = -1.0 / params.tau_n;
  sys.input_map = Eigen::VectorXd::Zero(3);
  sys.input_map(0) = 1.0 / params.tau_l;
  sys.output = Eigen::RowVectorXd::Zero(3);
  sys.output(1) = -params.k * params.beta;
  sys.output(2) = params.k * (1.0 - params.beta);
  sys.phi = params.phi;
  sys.state_names = {"x", "xp", "xn"};
  sys.fastest_time_constant = std::min({params.tau_l, params.tau_p, params.tau_n});
  return sys;
}

// ---------------------------------------------------------------- schedule

void InputSchedule::validate() const {
  if (segments.empty()) throw InvalidParameter("input schedule is empty");
  if (segments.front().t_start != 0.0) throw InvalidParameter("input schedule must start at t = 0");
  for (std::size_t i = 1; i < segments.size(); ++i)
    if (!(segments[i].t_start > segments[i - 1].t_start))
      throw InvalidParameter("input schedule start times must be strictly increasing");
  for (const auto& s : segments)
    if (!std::isfinite(s.value) || !std::isfinite(s.t_start)) throw InvalidParameter("input schedule values must be finite");
}

double InputSchedule::max_abs() const {
  double m = 0.0;
  for (const auto& s : segments) m = std::max(m, std::abs(s.value));
  return m;
}

// ---------------------------------------------------------------- trajectory

std::vector<double> Trajectory::component(std::size_t j) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = data[i * dim() + j];
  return out;
}

const std::vector<double>& Trajectory::series(const std::string& name) const {
  if (name == "y") return y;
  for (std::size_t i = 0; i < extra_names.size(); ++i)
    if (extra_names[i] == name) return extra[i];
  throw InvalidParameter("trajectory has no output named '" + name + "'");
}

Trajectory integrate(const StateSpace& system, const Eigen::VectorXd& ic, const InputSchedule& schedule, double dt,
                     double horizon) {
  system.validate();
  schedule.validate();
  if (!(dt > 0.0) || !(horizon > 0.0)) throw InvalidParameter("integration requires dt > 0 and horizon > 0");
  if (ic.size() != system.dim()) throw InvalidParameter("initial condition has wrong dimension");

  Trajectory traj;
  traj.dt = dt;
  traj.state_names = system.state_names;
  traj.schedule = schedule;
  if (system.fastest_time_constant > 0.0 && dt > system.fastest_time_constant / 5.0) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds fastest time constant / 5 = " << system.fastest_time_constant / 5.0;
    traj.warnings.push_back(msg.str());
  }

  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  const std::size_t n = static_cast<std::size_t>(system.dim());
  std::vector<std::size_t> start_index;
  for (const auto& seg : schedule.segments)
    start_index.push_back(static_cast<std::size_t>(std::max(0.0, std::ceil(seg.t_start / dt - 1e-9))));

  traj.t.resize(steps + 1);
  traj.data.resize((steps + 1) * n);
  traj.y.resize(steps + 1);
  traj.r.resize(steps + 1);
  for (const auto& o : system.extra_outputs) {
    traj.extra_names.push_back(o.name);
    traj.extra.emplace_back(steps + 1);
  }

  Eigen::VectorXd x = ic;
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::size_t seg = 0;
  for (std::size_t i = 0;; ++i) {
    while (seg + 1 < start_index.size() && start_index[seg + 1] <= i) ++seg;
    const double r = schedule.segments[seg].value;
    const double t = static_cast<double>(i) * dt;
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(x(j))) {
        std::ostringstream msg;
        msg << "divergence at t=" << t;
        throw NumericalError(msg.str());
      }
      traj.data[i * n + j] = x(j);
    }
    traj.t[i] = t;
    traj.y[i] = system.y(x);
    traj.r[i] = r;
    for (std::size_t e = 0; e < system.extra_outputs.size(); ++e) traj.extra[e][i] = system.extra_outputs[e].weights.dot(x);
    if (i == steps) break;

    system.derivative(x, r, k1);
    tmp = x + (dt / 2.0) * k1;
    system.derivative(tmp, r, k2);
    tmp = x + (dt / 2.0) * k2;
    system.derivative(tmp, r, k3);
    tmp = x + dt * k3;
    system.derivative(tmp, r, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return traj;
}

Trajectory integrate(const AmplifierParams& params, const std::array<double, 3>& ic, const InputSchedule& schedule,
                     double dt, double horizon) {
  return integrate(realize(params), Eigen::Vector3d(ic[0], ic[1], ic[2]), schedule, dt, horizon);
}

double default_time_step(const AmplifierParams& params) {
  return std::min({params.tau_l, params.tau_p, params.tau_n}) / 20.0;
}

// ---------------------------------------------------------------- oscillation

namespace {

// Lag (in samples, fractional) of the autocorrelation maximum within [lo, hi].
double autocorrelation_peak(const std::vector<double>& u, std::size_t lo, std::size_t hi) {
  const std::size_t n = u.size();
  hi = std::min(hi, n - 2);
  lo = std::max<std::size_t>(lo, 1);
  if (lo + 2 > hi) return static_cast<double>(lo);
  std::vector<double> acf(hi + 2, 0.0);
  for (std::size_t lag = lo - 1; lag <= hi + 1 && lag < n; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += u[i] * u[i + lag];
    acf[lag] = acc / static_cast<double>(n - lag);
  }
  std::size_t best = lo;
  for (std::size_t lag = lo; lag <= hi; ++lag)
    if (acf[lag] > acf[best]) best = lag;
  // Parabolic interpolation through the peak and its neighbours.
  const double a = acf[best - 1], b = acf[best], c = acf[best + 1];
  const double denom = a - 2.0 * b + c;
  double offset = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  offset = std::clamp(offset, -0.5, 0.5);
  return static_cast<double>(best) + offset;
}

}  // namespace

OscillationReport detect_oscillation(std::span<const double> signal, double dt, const DetectionOptions& options) {
  if (!(dt > 0.0)) throw InvalidParameter("detection requires dt > 0");
  if (options.transient_fraction < 0.0 || options.transient_fraction >= 1.0)
    throw InvalidParameter("transient fraction must lie in [0, 1)");
  const auto start = static_cast<std::size_t>(std::floor(options.transient_fraction * static_cast<double>(signal.size())));
  if (signal.size() < start + 3) throw NumericalError("insufficient horizon");
  const std::span<const double> w = signal.subspan(start);
  const double window = dt * static_cast<double>(w.size() - 1);

  OscillationReport rep;
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  rep.amplitude = *hi - *lo;
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());

  std::vector<double> crossing_times;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double a = w[i - 1] - mean;
    const double b = w[i] - mean;
    if ((a < 0.0) != (b < 0.0)) crossing_times.push_back(dt * (static_cast<double>(i - 1) + a / (a - b)));
  }
  rep.crossings = static_cast<int>(crossing_times.size());
  if (rep.amplitude <= options.amp_threshold || crossing_times.size() < 2) return rep;

  rep.period_zero_crossing =
      2.0 * (crossing_times.back() - crossing_times.front()) / static_cast<double>(crossing_times.size() - 1);
  if (rep.crossings < options.min_crossings) {
    // A few crossings early in the window are a settling transient; crossings
    // running up to the end mean an oscillation the window cuts short.
    const double tail = window - crossing_times.back();
    if (tail > rep.period_zero_crossing) return rep;
  }
  if (window < options.min_periods * rep.period_zero_crossing) throw NumericalError("insufficient horizon");

  // Decimate to ~200 samples per period before correlating.
  const auto stride = static_cast<std::size_t>(std::max(1.0, std::floor(rep.period_zero_crossing / (200.0 * dt))));
  std::vector<double> u;
  for (std::size_t i = 0; i < w.size(); i += stride) u.push_back(w[i] - mean);
  const double per = rep.period_zero_crossing / (static_cast<double>(stride) * dt);
  const double lag = autocorrelation_peak(u, static_cast<std::size_t>(std::floor(0.5 * per)),
                                          static_cast<std::size_t>(std::ceil(1.5 * per)));
  rep.period_autocorrelation = lag * static_cast<double>(stride) * dt;
  rep.agreement = std::abs(rep.period_zero_crossing - rep.period_autocorrelation) / rep.period_zero_crossing;

  rep.oscillating = rep.crossings >= options.min_crossings;
  if (rep.oscillating) rep.period = rep.period_zero_crossing;
  return rep;
}

OscillationReport detect_oscillation(const Trajectory& traj, const DetectionOptions& options) {
  return detect_oscillation(traj.y, traj.dt, options);
}

bool boundedness_check(const Trajectory& traj, double r_max, double margin, double settle_time,
                       std::span<const int> indices) {
  const double bound = std::abs(r_max) + 1.0 + margin;
  std::vector<int> all;
  if (indices.empty()) {
    all.resize(traj.dim());
    std::iota(all.begin(), all.end(), 0);
    indices = all;
  }
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.t[i] < settle_time) continue;
    const auto s = traj.state(i);
    for (int j : indices)
      if (!(std::abs(s[static_cast<std::size_t>(j)]) <= bound)) return false;
  }
  return true;
}

bool boundedness_check(const Trajectory& traj, const AmplifierParams& params, double r_max, double margin) {
  const double settle = 10.0 * std::max({params.tau_l, params.tau_p, params.tau_n});
  return boundedness_check(traj, r_max, margin, settle);
}

}  // namespace mfa
