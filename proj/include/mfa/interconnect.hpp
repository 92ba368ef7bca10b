#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mfa/equilibria.hpp"
#include "mfa/freq_analysis.hpp"
#include "mfa/sim.hpp"

namespace mfa {

// Mass-spring-damper seen from force to mixed velocity/position output:
// (kv s + kp) / (s^2 + b s + a).
struct LoadParams {
  double a = 350.0;
  double b = 35.0;
  double kv = 1.0;
  double kp = 20.0;

  void validate() const;
};

// Sign with which the load output enters the amplifier reference:
// add gives r_amp = r + ki ye, subtract gives r_amp = r - ki ye.
enum class Coupling { add, subtract };
std::string_view to_string(Coupling c);
Coupling parse_coupling(std::string_view name);

struct InterfaceGains {
  double ki = 10.0;
  double ko = 1.0;
  Coupling coupling = Coupling::add;

  void validate() const;
  double sign() const { return coupling == Coupling::add ? 1.0 : -1.0; }
};

RationalTF load_tf(const LoadParams& load);

// 0-passivity of the load at rate lambda on the default grid of the shifted load.
DominanceCertificate check_load_passivity(const LoadParams& load, double lambda);

// States (x, xp, xn, q, qdot); extra output "ye" = kp q + kv qdot.
// Load: q'' = -b q' - a q + ko y. Amplifier reference r +/- ki ye.
StateSpace assemble_closed_loop(const AmplifierParams& amp, const LoadParams& load, const InterfaceGains& iface);

// Equilibria of the assembled loop. The load settles at q = ko y / a, qdot = 0,
// which reduces the search to phi(y) = r +/- ki (kp / a) ko y + y / g0.
std::vector<Equilibrium> closed_loop_equilibria(const AmplifierParams& amp, const LoadParams& load,
                                                const InterfaceGains& iface, double r);

struct CompositionCertificate {
  int p_amplifier = 0;
  int p_load = 0;
  double lambda = 0.0;
  int p_total = 0;
  bool valid = false;
  std::string reason;
};

inline constexpr double kRateMatchTol = 1e-12;

CompositionCertificate compose_certificates(const DominanceCertificate& amp, const DominanceCertificate& load);

}  // namespace mfa
