#pragma once

#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mfa/sim.hpp"
#include "mfa/tf_core.hpp"

namespace mfa {

struct Channel {
  double rho = 1.0;
  double tau = 1.0;
};

enum class BankRole { positive, negative };

// Parallel bank of first-order lags sum rho_i / (tau_i s + 1) with unit DC gain.
struct ChannelBank {
  std::vector<Channel> channels;
  BankRole role = BankRole::positive;

  // tau > 0 and distinct, rho > 0, sum rho = 1.
  void validate() const;
  std::size_t size() const { return channels.size(); }
  double min_tau() const;
  double max_tau() const;
  // sum rho_i / tau_i
  double high_frequency_weight() const;
};

// C(s) = beta Cp(s) - (1 - beta) Cn(s) over the common denominator
// prod (tau_i s + 1). Throws InvalidParameter("time-scale ordering") unless
// every positive-bank tau is below every negative-bank tau.
RationalTF channel_tf(const ChannelBank& pos, const ChannelBank& neg, double beta);

// -k / (tau_l s + 1) * C(s), no cancellation.
RationalTF extended_openloop(double tau_l, const ChannelBank& pos, const ChannelBank& neg, double k, double beta);

// Balance at which the leading numerator coefficient of C vanishes and the
// outer zero leaves through infinity: Ln / (Lp + Ln), L = sum rho / tau.
double outer_zero_limit_balance(const ChannelBank& pos, const ChannelBank& neg);

enum class ZeroBucket { between_positive, between_negative, outer, misplaced };
std::string_view to_string(ZeroBucket b);

struct InterlacingReport {
  std::vector<Complex> zeros;
  std::vector<ZeroBucket> buckets;
  int between_positive = 0;
  int between_negative = 0;
  int outer = 0;
  bool satisfied = false;
  std::string diagnostic;
};

// Zeros of C(s) located against the bank poles: one zero strictly inside each
// gap between consecutive poles of the same bank and one outside the whole
// pole span.
InterlacingReport check_interlacing(const ChannelBank& pos, const ChannelBank& neg, double beta);

// States (x, xp1..xpm, xn1..xnn); each channel obeys tau_i x_i' = x - x_i and
// y = k (-beta sum rho_i xp_i + (1 - beta) sum rho_j xn_j).
StateSpace realize_diagonal(double tau_l, const ChannelBank& pos, const ChannelBank& neg, double k, double beta,
                            Nonlinearity phi = Nonlinearity::tanh);

// Full multichannel configuration as read from a bank file.
struct MultichannelConfig {
  double tau_l = 0.01;
  ChannelBank positive{{}, BankRole::positive};
  ChannelBank negative{{}, BankRole::negative};
  double k = 1.0;
  double beta = 0.5;
  Nonlinearity phi = Nonlinearity::tanh;

  void validate() const;
  RationalTF openloop() const { return extended_openloop(tau_l, positive, negative, k, beta); }
  StateSpace realize() const { return realize_diagonal(tau_l, positive, negative, k, beta, phi); }
};

// Random valid configuration: 1..max_m fast and 1..max_n slow channels with
// distinct log-uniform time constants, positive weights normalised to one and
// beta in (0.05, 0.95).
MultichannelConfig random_config(std::mt19937_64& rng, int max_m = 4, int max_n = 4);

}  // namespace mfa
