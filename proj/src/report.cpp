#include <algorithm>

#include "mfa/errors.hpp"
#include "mfa/io.hpp"

namespace mfa {

AnalysisReport analyze(const AmplifierParams& params, double r, std::optional<double> lambda, int grid_points) {
  params.validate();
  AnalysisReport rep;
  rep.params = params;
  rep.r = r;
  const RationalTF unit = mixed_amplifier_tf(params.with_gain(1.0));
  rep.poles = unit.poles();
  rep.zero = mixed_amplifier_zero(params.with_gain(1.0));
  rep.beta_star = critical_balance(params.tau_p, params.tau_n);
  if (lambda) {
    rep.lambda = *lambda;
    rep.lambda_policy = kRatePolicyUser;
  } else {
    rep.lambda = select_rate(params);
    rep.lambda_policy = kRatePolicyMidpoint;
  }
  rep.grid = default_grid(params);
  rep.grid.n_points = grid_points;
  rep.grid.validate();

  const BalanceCertificates certs = balance_certificates(params, rep.lambda, rep.grid);
  RegimeClassification c = classify_regime(params, r, rep.lambda, certs);
  rep.k0_bar = c.k0_bar;
  rep.k2_bar = c.k2_bar;
  rep.k2_failure = certs.k2_failure;
  rep.equilibria = std::move(c.equilibria);
  rep.regime = c.regime;
  rep.reason = c.reason;
  return rep;
}

Regime recompute_regime(const AnalysisReport& report) {
  BalanceCertificates certs{report.k0_bar, report.k2_bar, report.k2_failure};
  return classify_regime(report.params.k, report.equilibria, certs, report.lambda).regime;
}

MultichannelReport analyze_multichannel(const MultichannelConfig& config, double r, std::optional<double> lambda) {
  config.validate();
  MultichannelReport rep;
  rep.config = config;
  rep.r = r;
  const RationalTF unit = extended_openloop(config.tau_l, config.positive, config.negative, 1.0, config.beta);
  rep.poles = unit.poles();
  if (config.beta > 0.0 && config.beta < 1.0) {
    rep.interlacing = check_interlacing(config.positive, config.negative, config.beta);
  } else {
    rep.interlacing.zeros = unit.zeros();
    rep.interlacing.diagnostic = "interlacing is stated for beta in (0, 1)";
  }
  rep.outer_zero_limit_beta = outer_zero_limit_balance(config.positive, config.negative);
  if (lambda) {
    rep.lambda = *lambda;
    rep.lambda_policy = kRatePolicyUser;
  } else {
    rep.lambda = select_rate(unit);
    rep.lambda_policy = kRatePolicyMidpoint;
  }
  const BalanceCertificates certs = balance_certificates(unit, rep.lambda);
  RegimeClassification c = classify_regime(config.k, find_equilibria(config.realize(), r), certs, rep.lambda);
  rep.k0_bar = c.k0_bar;
  rep.k2_bar = c.k2_bar;
  rep.k2_failure = certs.k2_failure;
  rep.equilibria = std::move(c.equilibria);
  rep.regime = c.regime;
  rep.reason = c.reason;
  return rep;
}

}  // namespace mfa
