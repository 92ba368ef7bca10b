#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "mfa/errors.hpp"
#include "mfa/interconnect.hpp"
#include "oracles.hpp"

using namespace mfa;

namespace {

AmplifierParams loop_amp() {
  AmplifierParams p;
  p.tau_l = 0.01;
  p.tau_p = 0.1;
  p.tau_n = 1.0;
  p.k = 10.0;
  p.beta = 0.4;
  return p;
}

Eigen::VectorXd loop_ic() {
  Eigen::VectorXd ic = Eigen::VectorXd::Zero(5);
  ic(0) = 0.1;
  return ic;
}

DominanceCertificate amp_cert(const AmplifierParams& p, double lambda) {
  return check_p_passivity(mixed_amplifier_tf(p), lambda, 2, default_grid(p));
}

}  // namespace

TEST(LoadTf, DefaultLoadPoles) {
  const RationalTF l = load_tf(LoadParams{});
  auto poles = l.poles();
  ASSERT_EQ(poles.size(), 2u);
  std::sort(poles.begin(), poles.end(), [](Complex a, Complex b) { return a.imag() < b.imag(); });
  const double w = std::sqrt(350.0 - 17.5 * 17.5);
  EXPECT_NEAR(w, 6.614, 1e-3);
  EXPECT_NEAR(poles[0].real(), -17.5, 1e-10);
  EXPECT_NEAR(poles[1].real(), -17.5, 1e-10);
  EXPECT_NEAR(poles[0].imag(), -w, 1e-10);
  EXPECT_NEAR(poles[1].imag(), w, 1e-10);
  EXPECT_NEAR(l(Complex(0, 0)).real(), 20.0 / 350.0, 1e-15);
  EXPECT_NEAR(20.0 / 350.0, 0.0571, 1e-4);
}

TEST(LoadTf, InvariantsEnforced) {
  LoadParams l;
  l.kv = 0.0;
  EXPECT_THROW(load_tf(l), InvalidParameter);
  l = {};
  l.a = -1.0;
  EXPECT_THROW(l.validate(), InvalidParameter);
  InterfaceGains g;
  g.ki = 0.0;
  EXPECT_NO_THROW(g.validate());
  g.ko = -1.0;
  EXPECT_THROW(g.validate(), InvalidParameter);
}

TEST(LoadPassivity, DefaultLoadPasses) {
  const DominanceCertificate c = check_load_passivity(LoadParams{}, 15.0);
  EXPECT_TRUE(c.passed);
  EXPECT_TRUE(c.is_passivity());
  EXPECT_EQ(c.p, 0);
  EXPECT_GE(c.min_re, 0.0);
}

TEST(LoadPassivity, WeakPositionFeedbackFails) {
  LoadParams l;
  l.kp = 0.01;
  const DominanceCertificate c = check_load_passivity(l, 15.0);
  EXPECT_FALSE(c.passed);
  const RationalTF g = load_tf(l);
  EXPECT_LT(oracle::brute_min_re(g, 15.0, 1e-3, 1e4, 200000), 0.0);
  EXPECT_NEAR(c.min_re, oracle::brute_min_re(g, 15.0, 1e-3, 1e4, 200000), 1e-6);
}

TEST(LoadPassivity, UnshiftedIsPositiveRealness) {
  LoadParams l;
  l.a = 4.0;
  l.b = 3.0;
  l.kv = 1.0;
  l.kp = 2.0;
  const DominanceCertificate c = check_load_passivity(l, 0.0);
  // Re[(jw + 2)/(4 - w^2 + 3jw)] = (8 + w^2)/|.|^2 > 0
  EXPECT_TRUE(c.passed);
  EXPECT_GT(c.min_re, -1e-15);
}

TEST(Assemble, Structure) {
  const InterfaceGains iface;
  const StateSpace s = assemble_closed_loop(loop_amp(), LoadParams{}, iface);
  EXPECT_EQ(s.dim(), 5);
  EXPECT_EQ(s.state_names, (std::vector<std::string>{"x", "xp", "xn", "q", "qdot"}));
  ASSERT_EQ(s.extra_outputs.size(), 1u);
  EXPECT_EQ(s.extra_outputs[0].name, "ye");
  EXPECT_DOUBLE_EQ(s.extra_outputs[0].weights(3), 20.0);
  EXPECT_DOUBLE_EQ(s.extra_outputs[0].weights(4), 1.0);
  EXPECT_DOUBLE_EQ(s.A(4, 3), -350.0);
  EXPECT_DOUBLE_EQ(s.A(4, 4), -35.0);
  EXPECT_DOUBLE_EQ(s.A(3, 4), 1.0);
  // amplifier reference picks up +ki ye / tau_l
  EXPECT_DOUBLE_EQ(s.A(0, 3), 10.0 * 20.0 / 0.01);
  EXPECT_DOUBLE_EQ(s.A(0, 4), 10.0 * 1.0 / 0.01);
}

TEST(Assemble, SubtractCouplingFlipsReference) {
  InterfaceGains iface;
  iface.coupling = Coupling::subtract;
  const StateSpace s = assemble_closed_loop(loop_amp(), LoadParams{}, iface);
  EXPECT_DOUBLE_EQ(s.A(0, 3), -10.0 * 20.0 / 0.01);
  EXPECT_EQ(parse_coupling(to_string(Coupling::subtract)), Coupling::subtract);
  EXPECT_THROW(parse_coupling("multiply"), ParseError);
}

TEST(Assemble, CascadeBitMatchesStandaloneAmplifier) {
  InterfaceGains iface;
  iface.ki = 0.0;
  const AmplifierParams p = loop_amp();
  const StateSpace s = assemble_closed_loop(p, LoadParams{}, iface);
  const InputSchedule sched{{{0.0, 0.0}, {3.0, 0.5}}};
  const double dt = default_time_step(p);
  const Trajectory big = integrate(s, loop_ic(), sched, dt, 10.0);
  const Trajectory ref = integrate(p, {0.1, 0.0, 0.0}, sched, dt, 10.0);
  ASSERT_EQ(big.size(), ref.size());
  for (std::size_t i = 0; i < big.size(); ++i) {
    for (int j = 0; j < 3; ++j) ASSERT_EQ(big.state(i)[j], ref.state(i)[j]) << i;
    ASSERT_EQ(big.y[i], ref.y[i]);
  }
  // the load is still driven
  EXPECT_GT(std::abs(big.series("ye").back()), 1e-3);
}

TEST(Assemble, SeveredForwardPathLoadDecays) {
  InterfaceGains iface;
  iface.ko = 0.0;
  const AmplifierParams p = loop_amp();
  Eigen::VectorXd ic = loop_ic();
  ic(3) = 0.2;
  ic(4) = -1.0;
  const double dt = default_time_step(p);
  const Trajectory big = integrate(assemble_closed_loop(p, LoadParams{}, iface), ic, InputSchedule::constant(0.0), dt, 10.0);
  const auto last = big.state(big.size() - 1);
  EXPECT_LT(std::abs(last[3]) + std::abs(last[4]), 1e-12);
}

TEST(Assemble, SeveredForwardPathWithoutLoadTransientIsStandalone) {
  InterfaceGains iface;
  iface.ko = 0.0;
  const AmplifierParams p = loop_amp();
  const double dt = default_time_step(p);
  const Trajectory big =
      integrate(assemble_closed_loop(p, LoadParams{}, iface), loop_ic(), InputSchedule::constant(0.0), dt, 10.0);
  const Trajectory ref = integrate(p, {0.1, 0.0, 0.0}, InputSchedule::constant(0.0), dt, 10.0);
  for (std::size_t i = 0; i < big.size(); ++i) {
    for (int j = 0; j < 3; ++j) ASSERT_EQ(big.state(i)[j], ref.state(i)[j]) << i;
    ASSERT_EQ(big.state(i)[3], 0.0);
  }
}

TEST(Assemble, DefaultLoopLimitCycle) {
  const AmplifierParams p = loop_amp();
  const StateSpace s = assemble_closed_loop(p, LoadParams{}, InterfaceGains{});
  const Trajectory tr = integrate(s, loop_ic(), InputSchedule::constant(0.0), default_time_step(p), 50.0);
  const OscillationReport ry = detect_oscillation(tr.y, tr.dt);
  const OscillationReport re = detect_oscillation(tr.series("ye"), tr.dt);
  ASSERT_TRUE(ry.oscillating);
  ASSERT_TRUE(re.oscillating);
  EXPECT_NEAR(*ry.period, *re.period, 0.02 * *ry.period);
  EXPECT_LT(ry.agreement, 0.02);
  EXPECT_LT(re.agreement, 0.02);
}

TEST(Assemble, SubtractCouplingLosesBoundedness) {
  // With the opposite port sign the linear loop through the load is unstable.
  InterfaceGains iface;
  iface.coupling = Coupling::subtract;
  const AmplifierParams p = loop_amp();
  const StateSpace s = assemble_closed_loop(p, LoadParams{}, iface);
  const Eigen::VectorXcd ev = s.A.eigenvalues();
  EXPECT_GT(ev.real().maxCoeff(), 0.0);
  bool blew_up = false;
  try {
    const Trajectory tr = integrate(s, loop_ic(), InputSchedule::constant(0.0), default_time_step(p), 50.0);
    double sup = 0.0;
    for (double v : tr.data) sup = std::max(sup, std::abs(v));
    blew_up = sup > 1e6;
  } catch (const NumericalError&) {
    blew_up = true;
  }
  EXPECT_TRUE(blew_up);
}

TEST(ClosedLoopEquilibria, ScalarReductionMatches5DResidual) {
  for (Coupling c : {Coupling::add, Coupling::subtract})
    for (double r : {0.0, 0.4, -0.7})
      for (double beta : {0.2, 0.4, 0.8}) {
        AmplifierParams p = loop_amp();
        p.beta = beta;
        InterfaceGains iface;
        iface.coupling = c;
        const LoadParams load;
        const StateSpace s = assemble_closed_loop(p, load, iface);
        const auto eqs = closed_loop_equilibria(p, load, iface, r);
        ASSERT_FALSE(eqs.empty());
        for (const Equilibrium& e : eqs) {
          Eigen::VectorXd dx(5);
          s.derivative(e.state, r, dx);
          EXPECT_LT(dx.norm(), 1e-8);
          EXPECT_NEAR(e.state(3), iface.ko * e.y_star / load.a, 1e-12);
          EXPECT_EQ(e.state(4), 0.0);
          const double g0 = dc_loop_gain(p);
          const double ye = load.kp * e.state(3);
          if (g0 != 0.0) {
            EXPECT_NEAR(std::tanh(e.y_star), r + iface.sign() * iface.ki * ye + e.y_star / g0, 1e-8);
          }
          EXPECT_EQ(e.eigenvalues.size(), 5u);
        }
        const auto generic = find_equilibria(s, r);
        ASSERT_EQ(generic.size(), eqs.size());
        for (std::size_t i = 0; i < eqs.size(); ++i) EXPECT_NEAR(generic[i].y_star, eqs[i].y_star, 1e-9);
      }
}

TEST(Compose, Examples) {
  const DominanceCertificate a = amp_cert(loop_amp(), 15.0);
  const DominanceCertificate l = check_load_passivity(LoadParams{}, 15.0);
  ASSERT_TRUE(a.passed);
  const CompositionCertificate c = compose_certificates(a, l);
  EXPECT_TRUE(c.valid);
  EXPECT_EQ(c.p_amplifier, 2);
  EXPECT_EQ(c.p_load, 0);
  EXPECT_EQ(c.p_total, 2);
  EXPECT_EQ(c.lambda, 15.0);

  const CompositionCertificate m = compose_certificates(amp_cert(loop_amp(), 50.0), l);
  EXPECT_FALSE(m.valid);
  EXPECT_EQ(m.reason, "rate mismatch");

  const DominanceCertificate l2 = check_load_passivity(LoadParams{}, 15.0);
  const CompositionCertificate z = compose_certificates(l, l2);
  EXPECT_TRUE(z.valid);
  EXPECT_EQ(z.p_total, 0);
}

TEST(Compose, SectorCertificateRejected) {
  const DominanceCertificate a = check_p_dominance(mixed_amplifier_tf(loop_amp()), 15.0, 1.0, 2, default_grid(loop_amp()));
  const CompositionCertificate c = compose_certificates(a, check_load_passivity(LoadParams{}, 15.0));
  EXPECT_FALSE(c.valid);
  EXPECT_FALSE(c.reason.empty());
}

TEST(Compose, FailedComponent) {
  LoadParams weak;
  weak.kp = 0.01;
  const CompositionCertificate c = compose_certificates(amp_cert(loop_amp(), 15.0), check_load_passivity(weak, 15.0));
  EXPECT_FALSE(c.valid);
  EXPECT_FALSE(c.reason.empty());
}

TEST(InterconnectProperties, CertifiedUnstableBoundedLoopsOscillate) {
  int certified = 0;
  for (double k : {5.0, 10.0, 20.0})
    for (double beta : {0.3, 0.4, 0.5}) {
      AmplifierParams p = loop_amp();
      p.k = k;
      p.beta = beta;
      const LoadParams load;
      const InterfaceGains iface;
      const CompositionCertificate c = compose_certificates(amp_cert(p, 15.0), check_load_passivity(load, 15.0));
      if (!c.valid || c.p_total != 2) continue;
      const auto eqs = closed_loop_equilibria(p, load, iface, 0.0);
      const bool all_unstable =
          std::all_of(eqs.begin(), eqs.end(), [](const Equilibrium& e) { return e.stability == Stability::unstable; });
      if (!all_unstable) continue;
      const StateSpace s = assemble_closed_loop(p, load, iface);
      const Trajectory tr = integrate(s, loop_ic(), InputSchedule::constant(0.0), default_time_step(p), 50.0);
      double sup = 0.0;
      for (double v : tr.data) sup = std::max(sup, std::abs(v));
      if (!(sup < 1e3)) continue;
      ++certified;
      EXPECT_TRUE(detect_oscillation(tr).oscillating) << "k=" << k << " beta=" << beta;
    }
  EXPECT_GE(certified, 3);
}
