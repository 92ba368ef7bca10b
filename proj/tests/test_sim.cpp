#include <gtest/gtest.h>

#include <random>

#include "mfa/equilibria.hpp"
#include "mfa/errors.hpp"
#include "mfa/sim.hpp"
#include "oracles.hpp"

using namespace mfa;

namespace {

AmplifierParams amp(double k, double beta, double tl = 0.01, double tp = 0.1, double tn = 1.0) {
  AmplifierParams p;
  p.tau_l = tl;
  p.tau_p = tp;
  p.tau_n = tn;
  p.k = k;
  p.beta = beta;
  return p;
}

InputSchedule pulse() { return InputSchedule{{{0.0, 0.0}, {20.0, -0.5}, {30.0, 0.0}}}; }

// k = 0 from (1, 1, 1): x decays on tau_l and drives the two filter lags.
// tau xf' = x - xf, xf(0) = 1  =>  xf = a e^{-t/tau_l} + (1 - a) e^{-t/tau}.
std::array<double, 3> cascade_solution(double tl, double tp, double tn, double t) {
  auto lag = [&](double tau) {
    const double a = tl / (tl - tau);
    return a * std::exp(-t / tl) + (1.0 - a) * std::exp(-t / tau);
  };
  return {std::exp(-t / tl), lag(tp), lag(tn)};
}

double endpoint_error(double dt) {
  const AmplifierParams p = amp(0, 0.3);
  const Trajectory tr = integrate(p, {1.0, 1.0, 1.0}, InputSchedule::constant(0.0), dt, 0.05);
  const auto last = tr.state(tr.size() - 1);
  const auto exact = cascade_solution(0.01, 0.1, 1.0, tr.t.back());
  return std::max({std::abs(last[0] - exact[0]), std::abs(last[1] - exact[1]), std::abs(last[2] - exact[2])});
}

std::vector<double> sine(double dt, double horizon, double period) {
  std::vector<double> s;
  for (int i = 0; i * dt <= horizon + 1e-12; ++i) s.push_back(std::sin(2.0 * M_PI * i * dt / period));
  return s;
}

}  // namespace

TEST(VectorField, OriginIsRest) {
  const auto f = vector_field(amp(5, 0.4), {0, 0, 0}, 0.0);
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[2], 0.0);
}

TEST(VectorField, OpenLoopLags) {
  const auto f = vector_field(amp(0, 0.4), {1, 0, 0}, 0.0);
  EXPECT_DOUBLE_EQ(f[0], -100.0);
  EXPECT_DOUBLE_EQ(f[1], 10.0);
  EXPECT_DOUBLE_EQ(f[2], 1.0);
}

TEST(VectorField, VanishesAtEquilibria) {
  for (double r : {0.0, 0.3}) {
    const AmplifierParams p = amp(5, 0.8);
    for (const Equilibrium& e : find_equilibria(p, r)) {
      const auto f = vector_field(p, {e.state(0), e.state(1), e.state(2)}, r);
      EXPECT_LT(std::abs(f[0]) + std::abs(f[1]) + std::abs(f[2]), 1e-8);
    }
  }
}

TEST(VectorField, RealisationAgrees) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const AmplifierParams p = oracle::random_params(rng);
    const StateSpace s = realize(p);
    const std::array<double, 3> x{u(rng), u(rng), u(rng)};
    const double r = u(rng);
    Eigen::VectorXd dx(3);
    s.derivative(Eigen::Vector3d(x[0], x[1], x[2]), r, dx);
    const auto f = vector_field(p, x, r);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(dx(j), f[j], 1e-9 * std::max(1.0, std::abs(f[j])));
  }
}

TEST(Integrate, OpenLoopDecay) {
  const double dt = 0.01 / 10.0;
  const Trajectory tr = integrate(amp(0, 0.3), {1.0, 1.0, 1.0}, InputSchedule::constant(0.0), dt, 3.0);
  const auto last = tr.state(tr.size() - 1);
  const double t = tr.t.back();
  EXPECT_NEAR(t, 3.0, 1e-9);
  const auto exact = cascade_solution(0.01, 0.1, 1.0, t);
  for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(last[i] - exact[i]), 1e-6);
}

TEST(Integrate, LayoutInvariants) {
  const Trajectory tr = integrate(amp(5, 0.4), {0.1, 0.0, 0.0}, pulse(), 5e-4, 40.0);
  EXPECT_EQ(tr.t.size(), tr.y.size());
  EXPECT_EQ(tr.t.size(), tr.r.size());
  EXPECT_EQ(tr.data.size(), tr.t.size() * 3);
  EXPECT_EQ(tr.state_names, (std::vector<std::string>{"x", "xp", "xn"}));
  for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_NEAR(tr.t[i], i * 5e-4, 1e-9);
  EXPECT_EQ(tr.schedule.segments.size(), 3u);
  for (std::size_t i = 0; i < tr.size(); i += 97) {
    const auto s = tr.state(i);
    EXPECT_NEAR(tr.y[i], 5.0 * (-0.4 * s[1] + 0.6 * s[2]), 1e-14);
  }
}

TEST(Integrate, ScheduleSnapsToFirstSampleAtOrAfterBreak) {
  const InputSchedule s{{{0.0, 0.0}, {0.0125, 1.0}}};
  const Trajectory tr = integrate(amp(1, 0.3), {0, 0, 0}, s, 0.01, 0.05);
  ASSERT_GE(tr.r.size(), 4u);
  EXPECT_EQ(tr.r[0], 0.0);
  EXPECT_EQ(tr.r[1], 0.0);
  EXPECT_EQ(tr.r[2], 1.0);
  EXPECT_EQ(tr.r[3], 1.0);
}

TEST(Integrate, Deterministic) {
  const Trajectory a = integrate(amp(5, 0.4), {0.1, 0, 0}, pulse(), 5e-4, 10.0);
  const Trajectory b = integrate(amp(5, 0.4), {0.1, 0, 0}, pulse(), 5e-4, 10.0);
  EXPECT_EQ(a.data, b.data);
}

TEST(Integrate, LargeStepWarns) {
  const Trajectory tr = integrate(amp(1, 0.3), {0, 0, 0}, InputSchedule::constant(0.0), 0.004, 0.1);
  EXPECT_FALSE(tr.warnings.empty());
  const Trajectory ok = integrate(amp(1, 0.3), {0, 0, 0}, InputSchedule::constant(0.0), 0.001, 0.1);
  EXPECT_TRUE(ok.warnings.empty());
}

TEST(Integrate, DivergenceReported) {
  StateSpace s;
  s.A = Eigen::MatrixXd::Constant(1, 1, 50.0);
  s.input_map = Eigen::VectorXd::Zero(1);
  s.output = Eigen::RowVectorXd::Zero(1);
  s.state_names = {"z"};
  s.fastest_time_constant = 0.02;
  try {
    integrate(s, Eigen::VectorXd::Ones(1), InputSchedule::constant(0.0), 0.05, 100.0);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("divergence at t="), std::string::npos);
  }
}

TEST(Integrate, BadArguments) {
  EXPECT_THROW(integrate(amp(1, 0.3), {0, 0, 0}, InputSchedule::constant(0.0), 0.0, 1.0), InvalidParameter);
  EXPECT_THROW(integrate(amp(1, 0.3), {0, 0, 0}, InputSchedule::constant(0.0), 1e-3, -1.0), InvalidParameter);
  EXPECT_THROW(integrate(amp(1, 0.3), {0, 0, 0}, InputSchedule{{{0.0, 0.0}, {0.0, 1.0}}}, 1e-3, 1.0),
               InvalidParameter);
  EXPECT_THROW(integrate(amp(1, 0.3), {0, 0, 0}, InputSchedule{{{1.0, 0.0}}}, 1e-3, 1.0), InvalidParameter);
}

TEST(Integrate, ZeroDominantCaseReturnsToSteadyState) {
  const AmplifierParams p = amp(5, 0.2);
  const Trajectory tr = integrate(p, {0.1, 0, 0}, pulse(), default_time_step(p), 60.0);
  const auto before = tr.state(static_cast<std::size_t>(19.9 / tr.dt));
  const auto after = tr.state(tr.size() - 1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(before[i], 0.0, 1e-4);
    EXPECT_NEAR(after[i], 0.0, 1e-4);
  }
  // the pulse does move the system
  const auto during = tr.state(static_cast<std::size_t>(29.0 / tr.dt));
  EXPECT_LT(during[0], -0.1);
}

TEST(Integrate, BistableCaseSwitchesEquilibrium) {
  const AmplifierParams p = amp(5, 0.8);
  const Trajectory tr = integrate(p, {0.1, 0, 0}, pulse(), default_time_step(p), 60.0);
  const auto eqs = find_equilibria(p, 0.0);
  ASSERT_EQ(eqs.size(), 3u);
  const double y_before = tr.y[static_cast<std::size_t>(19.9 / tr.dt)];
  const double y_after = tr.y.back();
  // Settles on one outer equilibrium, and the pulse kicks it to the other.
  EXPECT_NEAR(std::abs(y_before), eqs[2].y_star, 1e-3);
  EXPECT_NEAR(y_after, -y_before, 1e-3);
}

TEST(Detect, ConstantSignal) {
  const std::vector<double> c(20001, 0.25);
  const OscillationReport rep = detect_oscillation(c, 1e-3);
  EXPECT_FALSE(rep.oscillating);
  EXPECT_FALSE(rep.period.has_value());
}

TEST(Detect, Sinusoid) {
  const auto s = sine(1e-3, 40.0, 1.0);
  const OscillationReport rep = detect_oscillation(s, 1e-3);
  ASSERT_TRUE(rep.oscillating);
  ASSERT_TRUE(rep.period.has_value());
  EXPECT_NEAR(*rep.period, 1.0, 0.002);
  EXPECT_NEAR(rep.amplitude, 2.0, 1e-3);
  EXPECT_LT(rep.agreement, 0.02);
}

TEST(Detect, BelowThresholdIsNotOscillating) {
  auto s = sine(1e-3, 40.0, 1.0);
  for (double& v : s) v *= 1e-4;
  EXPECT_FALSE(detect_oscillation(s, 1e-3).oscillating);
}

TEST(Detect, InsufficientHorizon) {
  const auto s = sine(1e-3, 8.0, 1.0);
  try {
    detect_oscillation(s, 1e-3);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_STREQ(e.what(), "insufficient horizon");
  }
}

TEST(Detect, CutShortOscillationStillThrows) {
  // two periods in the window: fewer than five crossings, running to the end
  EXPECT_THROW(detect_oscillation(sine(1e-3, 4.0, 1.0), 1e-3), NumericalError);
}

TEST(Detect, SettlingTransientIsNotOscillation) {
  // damped swing through the mean early in the window, flat afterwards
  std::vector<double> s;
  for (int i = 0; i <= 60000; ++i) {
    const double t = i * 1e-3;
    s.push_back(t < 30.0 ? 1.0 : -1.0 + 2.0 * std::exp(-(t - 30.0)) * std::cos(2.0 * (t - 30.0)));
  }
  const OscillationReport rep = detect_oscillation(s, 1e-3);
  EXPECT_FALSE(rep.oscillating);
  EXPECT_LT(rep.crossings, 5);
}

TEST(Detect, BistablePulseSwitchReportsNoOscillation) {
  const AmplifierParams p = amp(5, 0.8);
  const Trajectory tr = integrate(p, {0.1, 0, 0}, pulse(), 5e-4, 60.0);
  EXPECT_FALSE(detect_oscillation(tr).oscillating);
}

TEST(Detect, OscillatoryCaseOscillates) {
  const AmplifierParams p = amp(5, 0.4);
  const Trajectory tr = integrate(p, {0.1, 0, 0}, InputSchedule::constant(0.0), default_time_step(p), 60.0);
  const OscillationReport rep = detect_oscillation(tr);
  ASSERT_TRUE(rep.oscillating);
  ASSERT_TRUE(rep.period.has_value());
  EXPECT_GT(*rep.period, 0.0);
  EXPECT_LT(rep.agreement, 0.02);
}

TEST(Detect, ZeroDominantCaseDoesNotOscillate) {
  const AmplifierParams p = amp(5, 0.2);
  const Trajectory tr = integrate(p, {0.1, 0, 0}, InputSchedule::constant(0.0), default_time_step(p), 60.0);
  EXPECT_FALSE(detect_oscillation(tr).oscillating);
}

TEST(Bounded, Examples) {
  const Trajectory decay = integrate(amp(0, 0.3), {1, 1, 1}, InputSchedule::constant(0.0), 1e-3, 15.0);
  EXPECT_TRUE(boundedness_check(decay, amp(0, 0.3), 0.0));
  for (double beta : {0.2, 0.4, 0.8}) {
    const AmplifierParams p = amp(5, beta);
    const Trajectory tr = integrate(p, {0.1, 0, 0}, pulse(), default_time_step(p), 60.0);
    EXPECT_TRUE(boundedness_check(tr, p, 0.5)) << beta;
  }
}

TEST(Bounded, DivergingSeriesRejected) {
  Trajectory tr = integrate(amp(0, 0.3), {0, 0, 0}, InputSchedule::constant(0.0), 1e-2, 20.0);
  for (std::size_t i = 0; i < tr.size(); ++i) tr.data[i * 3] = std::exp(0.3 * tr.t[i]);
  EXPECT_FALSE(boundedness_check(tr, amp(0, 0.3), 0.0));
}

// ------------------------------------------------------------- properties

TEST(SimProperties, Rk4Order) {
  const double e1 = endpoint_error(1e-3);
  const double e2 = endpoint_error(5e-4);
  const double ratio = e1 / e2;
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(SimProperties, StableEquilibriaStayPut) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> beta(0.0, 1.0), lk(std::log(0.1), std::log(50.0)), rd(-0.5, 0.5);
  int checked = 0;
  for (int i = 0; i < 40 && checked < 15; ++i) {
    const AmplifierParams p = amp(std::exp(lk(rng)), beta(rng));
    const double r = rd(rng);
    for (const Equilibrium& e : find_equilibria(p, r)) {
      if (e.stability != Stability::stable) continue;
      const Trajectory tr = integrate(p, {e.state(0), e.state(1), e.state(2)}, InputSchedule::constant(r),
                                      default_time_step(p), 100.0);
      double dist = 0.0;
      for (std::size_t n = 0; n < tr.size(); ++n) {
        const auto s = tr.state(n);
        for (int j = 0; j < 3; ++j) dist = std::max(dist, std::abs(s[j] - e.state(j)));
      }
      EXPECT_LT(dist, 1e-6);
      ++checked;
    }
  }
  EXPECT_GE(checked, 10);
}

TEST(SimProperties, UnstableEquilibriaDepart) {
  for (double beta : {0.4, 0.8}) {
    const AmplifierParams p = amp(5, beta);
    for (const Equilibrium& e : find_equilibria(p, 0.0)) {
      if (e.stability != Stability::unstable) continue;
      double max_re = -INFINITY;
      for (const Complex& l : e.eigenvalues) max_re = std::max(max_re, l.real());
      ASSERT_GT(max_re, 1e-2);
      // nudge by rounding-level noise
      const Trajectory tr = integrate(p, {e.state(0) + 1e-12, e.state(1), e.state(2)}, InputSchedule::constant(0.0),
                                      default_time_step(p), 100.0);
      double dist = 0.0;
      for (std::size_t n = 0; n < tr.size(); ++n) dist = std::max(dist, std::abs(tr.state(n)[0] - e.state(0)));
      EXPECT_GT(dist, 1e-3);
    }
  }
}

TEST(SimProperties, OddSymmetry) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0), beta(0.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    const AmplifierParams p = amp(std::exp(3.0 * u(rng)), beta(rng));
    const std::array<double, 3> ic{u(rng), u(rng), u(rng)};
    const Trajectory a = integrate(p, ic, InputSchedule::constant(0.0), default_time_step(p), 10.0);
    const Trajectory b = integrate(p, {-ic[0], -ic[1], -ic[2]}, InputSchedule::constant(0.0), default_time_step(p), 10.0);
    double worst = 0.0;
    for (std::size_t n = 0; n < a.data.size(); ++n) worst = std::max(worst, std::abs(a.data[n] + b.data[n]));
    EXPECT_LT(worst, 1e-10);
  }
}

TEST(SimProperties, UltimateBound) {
  for (double k : {0.1, 5.0, 100.0})
    for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const AmplifierParams p = amp(k, beta);
      const Trajectory tr = integrate(p, {0.1, 0, 0}, pulse(), default_time_step(p), 40.0);
      EXPECT_TRUE(boundedness_check(tr, p, 0.5)) << "k=" << k << " beta=" << beta;
    }
}

TEST(SimProperties, PeriodEstimatesAgree) {
  int oscillating = 0;
  for (double beta : {0.3, 0.35, 0.4, 0.45, 0.5}) {
    for (double k : {5.0, 20.0}) {
      const AmplifierParams p = amp(k, beta);
      const Trajectory tr = integrate(p, {0.1, 0, 0}, InputSchedule::constant(0.0), default_time_step(p), 200.0);
      const OscillationReport rep = detect_oscillation(tr);
      if (!rep.oscillating) continue;
      ++oscillating;
      EXPECT_GT(*rep.period, 0.0);
      EXPECT_LT(rep.agreement, 0.02) << "k=" << k << " beta=" << beta;
    }
  }
  EXPECT_GT(oscillating, 3);
}
