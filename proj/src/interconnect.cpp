#include "mfa/interconnect.hpp"

#include <cmath>

#include "mfa/errors.hpp"

namespace mfa {

void LoadParams::validate() const {
  if (!(a > 0.0)) throw InvalidParameter("load requires spring constant a > 0");
  if (!(b > 0.0)) throw InvalidParameter("load requires damping b > 0");
  if (!(kv > 0.0)) throw InvalidParameter("load requires velocity weight kv > 0");
  if (!(kp > 0.0)) throw InvalidParameter("load requires position weight kp > 0");
}

std::string_view to_string(Coupling c) { return c == Coupling::add ? "add" : "subtract"; }

Coupling parse_coupling(std::string_view name) {
  if (name == "add") return Coupling::add;
  if (name == "subtract") return Coupling::subtract;
  throw ParseError("unknown coupling '" + std::string(name) + "' (expected add or subtract)");
}

void InterfaceGains::validate() const {
  if (!(ki >= 0.0)) throw InvalidParameter("interface requires ki >= 0");
  if (!(ko >= 0.0)) throw InvalidParameter("interface requires ko >= 0");
}

RationalTF load_tf(const LoadParams& load) {
  load.validate();
  return RationalTF(Polynomial{load.kp, load.kv}, Polynomial{load.a, load.b, 1.0});
}

DominanceCertificate check_load_passivity(const LoadParams& load, double lambda) {
  const RationalTF g = load_tf(load);
  return check_p_passivity(g, lambda, 0, default_grid(g, lambda));
}

StateSpace assemble_closed_loop(const AmplifierParams& amp, const LoadParams& load, const InterfaceGains& iface) {
  load.validate();
  iface.validate();
  const StateSpace core = realize(amp);

  StateSpace sys;
  sys.A = Eigen::MatrixXd::Zero(5, 5);
  sys.A.topLeftCorner(3, 3) = core.A;
  const double c = iface.sign() * iface.ki / amp.tau_l;
  sys.A(0, 3) = c * load.kp;
  sys.A(0, 4) = c * load.kv;
  sys.A(3, 4) = 1.0;
  sys.A(4, 1) = iface.ko * core.output(1);
  sys.A(4, 2) = iface.ko * core.output(2);
  sys.A(4, 3) = -load.a;
  sys.A(4, 4) = -load.b;

  sys.input_map = Eigen::VectorXd::Zero(5);
  sys.input_map.head(3) = core.input_map;
  sys.output = Eigen::RowVectorXd::Zero(5);
  sys.output.head(3) = core.output;
  sys.phi = amp.phi;
  sys.state_names = {"x", "xp", "xn", "q", "qdot"};

  Eigen::RowVectorXd ye = Eigen::RowVectorXd::Zero(5);
  ye(3) = load.kp;
  ye(4) = load.kv;
  sys.extra_outputs.push_back({"ye", ye});
  sys.fastest_time_constant = std::min(core.fastest_time_constant, 1.0 / std::sqrt(load.a));
  return sys;
}

std::vector<Equilibrium> closed_loop_equilibria(const AmplifierParams& amp, const LoadParams& load,
                                                const InterfaceGains& iface, double r) {
  const StateSpace sys = assemble_closed_loop(amp, load, iface);
  const double g0 = dc_loop_gain(amp);
  // ki kp ko / a: static gain from y back to the amplifier reference.
  const double back = iface.sign() * iface.ki * load.kp * iface.ko / load.a;
  const double denom = 1.0 + g0 * back;
  if (denom == 0.0) throw NumericalError("singular state matrix: equilibria are not isolated");
  const double g_eff = g0 / denom;

  std::vector<Equilibrium> out;
  for (const ScalarRoot& root : solve_scalar_equilibria(g_eff, r, amp.phi)) {
    const double r_amp = r + back * root.y;
    const double x = r_amp - apply(amp.phi, root.y);
    Eigen::VectorXd state(5);
    state << x, x, x, iface.ko * root.y / load.a, 0.0;
    const Eigen::MatrixXd jac = sys.A - slope(amp.phi, root.y) * sys.input_map * sys.output;
    out.push_back(make_equilibrium(root, std::move(state), jac));
  }
  return out;
}

CompositionCertificate compose_certificates(const DominanceCertificate& amp, const DominanceCertificate& load) {
  CompositionCertificate c;
  c.p_amplifier = amp.p;
  c.p_load = load.p;
  c.p_total = amp.p + load.p;
  c.lambda = amp.lambda;
  if (!amp.is_passivity() || !load.is_passivity()) {
    c.reason = "composition needs passivity certificates (infinite sector)";
    return c;
  }
  if (std::abs(amp.lambda - load.lambda) > kRateMatchTol) {
    c.reason = "rate mismatch";
    return c;
  }
  if (!amp.passed) {
    c.reason = "amplifier certificate failed: " + amp.diagnostic;
    return c;
  }
  if (!load.passed) {
    c.reason = "load certificate failed: " + load.diagnostic;
    return c;
  }
  c.valid = true;
  return c;
}

}  // namespace mfa
