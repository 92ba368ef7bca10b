#include "mfa/multichannel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

constexpr double kUnitGainTol = 1e-9;
constexpr double kImagTol = 1e-8;

std::vector<double> all_taus(const ChannelBank& pos, const ChannelBank& neg) {
  std::vector<double> taus;
  for (const Channel& c : pos.channels) taus.push_back(c.tau);
  for (const Channel& c : neg.channels) taus.push_back(c.tau);
  return taus;
}

void require_ordering(const ChannelBank& pos, const ChannelBank& neg) {
  pos.validate();
  neg.validate();
  if (!(pos.max_tau() < neg.min_tau())) throw InvalidParameter("time-scale ordering");
}

// sum_i rho_i prod_{l != i} (tau_l s + 1) over the full pole set, so that
// both banks share the common denominator.
Polynomial bank_numerator(const ChannelBank& bank, const std::vector<double>& taus) {
  Polynomial acc;
  for (const Channel& c : bank.channels) {
    Polynomial term = Polynomial::constant(c.rho);
    for (double t : taus)
      if (t != c.tau) term = term * Polynomial::lag(t);
    acc = acc + term;
  }
  return acc;
}

// Poles -1/tau sorted ascending (most negative first).
std::vector<double> bank_poles(const ChannelBank& bank) {
  std::vector<double> p;
  for (const Channel& c : bank.channels) p.push_back(-1.0 / c.tau);
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

void ChannelBank::validate() const {
  const char* name = role == BankRole::positive ? "positive" : "negative";
  if (channels.empty()) throw InvalidParameter(std::string(name) + " bank is empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const Channel& c = channels[i];
    if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw InvalidParameter(std::string(name) + " bank requires tau > 0");
    if (!(c.rho > 0.0) || !std::isfinite(c.rho)) throw InvalidParameter(std::string(name) + " bank requires rho > 0");
    for (std::size_t j = 0; j < i; ++j)
      if (channels[j].tau == c.tau) throw InvalidParameter(std::string(name) + " bank requires distinct time constants");
    sum += c.rho;
  }
  if (std::abs(sum - 1.0) > kUnitGainTol) throw InvalidParameter(std::string(name) + " bank requires sum rho = 1");
}

double ChannelBank::min_tau() const {
  double m = INFINITY;
  for (const Channel& c : channels) m = std::min(m, c.tau);
  return m;
}

double ChannelBank::max_tau() const {
  double m = 0.0;
  for (const Channel& c : channels) m = std::max(m, c.tau);
  return m;
}

double ChannelBank::high_frequency_weight() const {
  double w = 0.0;
  for (const Channel& c : channels) w += c.rho / c.tau;
  return w;
}

RationalTF channel_tf(const ChannelBank& pos, const ChannelBank& neg, double beta) {
  require_ordering(pos, neg);
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidParameter("requires balance beta in [0, 1]");
  const std::vector<double> taus = all_taus(pos, neg);
  Polynomial den = Polynomial::constant(1.0);
  for (double t : taus) den = den * Polynomial::lag(t);
  const Polynomial num =
      bank_numerator(pos, taus).scaled(beta) - bank_numerator(neg, taus).scaled(1.0 - beta);
  return RationalTF(num, den);
}

RationalTF extended_openloop(double tau_l, const ChannelBank& pos, const ChannelBank& neg, double k, double beta) {
  if (!(tau_l > 0.0)) throw InvalidParameter("requires tau_l > 0");
  if (!(k >= 0.0)) throw InvalidParameter("requires gain k >= 0");
  for (double t : all_taus(pos, neg))
    if (t == tau_l) throw InvalidParameter("requires tau_l distinct from the channel time constants");
  const RationalTF c = channel_tf(pos, neg, beta);
  return RationalTF(c.num().scaled(-k), c.den() * Polynomial::lag(tau_l));
}

double outer_zero_limit_balance(const ChannelBank& pos, const ChannelBank& neg) {
  require_ordering(pos, neg);
  const double lp = pos.high_frequency_weight();
  const double ln = neg.high_frequency_weight();
  return ln / (lp + ln);
}

std::string_view to_string(ZeroBucket b) {
  switch (b) {
    case ZeroBucket::between_positive:
      return "between-positive-poles";
    case ZeroBucket::between_negative:
      return "between-negative-poles";
    case ZeroBucket::outer:
      return "outer";
    case ZeroBucket::misplaced:
      return "misplaced";
  }
  return "misplaced";
}

InterlacingReport check_interlacing(const ChannelBank& pos, const ChannelBank& neg, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidParameter("interlacing check requires beta in (0, 1)");
  const RationalTF c = channel_tf(pos, neg, beta);
  InterlacingReport rep;
  rep.zeros = c.zeros();

  const std::vector<double> pp = bank_poles(pos);
  const std::vector<double> np = bank_poles(neg);
  const double lo = pp.front();  // left-most pole overall
  const double hi = np.back();   // right-most pole overall
  const double scale = std::max(std::abs(lo), std::abs(hi));

  // One slot per gap between consecutive same-bank poles.
  std::vector<int> pos_gaps(pp.size() - 1, 0);
  std::vector<int> neg_gaps(np.size() - 1, 0);
  auto locate = [](const std::vector<double>& poles, double z) -> int {
    for (std::size_t i = 0; i + 1 < poles.size(); ++i)
      if (z > poles[i] && z < poles[i + 1]) return static_cast<int>(i);
    return -1;
  };

  for (const Complex& z : rep.zeros) {
    ZeroBucket b = ZeroBucket::misplaced;
    if (std::abs(z.imag()) <= kImagTol * scale) {
      const double x = z.real();
      if (x < lo || x > hi) {
        b = ZeroBucket::outer;
        ++rep.outer;
      } else if (int g = locate(pp, x); g >= 0) {
        b = ZeroBucket::between_positive;
        ++rep.between_positive;
        ++pos_gaps[g];
      } else if (int h = locate(np, x); h >= 0) {
        b = ZeroBucket::between_negative;
        ++rep.between_negative;
        ++neg_gaps[h];
      }
    }
    rep.buckets.push_back(b);
  }

  const std::size_t m = pos.size();
  const std::size_t n = neg.size();
  const bool gaps_ok = std::all_of(pos_gaps.begin(), pos_gaps.end(), [](int v) { return v == 1; }) &&
                       std::all_of(neg_gaps.begin(), neg_gaps.end(), [](int v) { return v == 1; });
  const bool any_misplaced = std::find(rep.buckets.begin(), rep.buckets.end(), ZeroBucket::misplaced) != rep.buckets.end();
  rep.satisfied = rep.zeros.size() == m + n - 1 && !any_misplaced && gaps_ok && rep.outer == 1 &&
                  rep.between_positive == static_cast<int>(m - 1) && rep.between_negative == static_cast<int>(n - 1);
  if (!rep.satisfied) {
    if (rep.zeros.size() != m + n - 1)
      rep.diagnostic = "expected " + std::to_string(m + n - 1) + " zeros, found " + std::to_string(rep.zeros.size());
    else if (any_misplaced)
      rep.diagnostic = "zero off the real axis or between the two banks";
    else
      rep.diagnostic = "zeros do not interlace the bank poles";
  }
  return rep;
}

StateSpace realize_diagonal(double tau_l, const ChannelBank& pos, const ChannelBank& neg, double k, double beta,
                            Nonlinearity phi) {
  require_ordering(pos, neg);
  if (!(tau_l > 0.0)) throw InvalidParameter("requires tau_l > 0");
  const int m = static_cast<int>(pos.size());
  const int n = static_cast<int>(neg.size());
  const int dim = 1 + m + n;

  StateSpace sys;
  sys.A = Eigen::MatrixXd::Zero(dim, dim);
  sys.input_map = Eigen::VectorXd::Zero(dim);
  sys.output = Eigen::RowVectorXd::Zero(dim);
  sys.A(0, 0) = -1.0 / tau_l;
  sys.input_map(0) = 1.0 / tau_l;
  sys.state_names.push_back("x");
  double fastest = tau_l;
  auto add_channel = [&](int idx, const Channel& c, double weight, const std::string& name) {
    sys.A(idx, 0) = 1.0 / c.tau;
    sys.A(idx, idx) = -1.0 / c.tau;
    sys.output(idx) = weight;
    sys.state_names.push_back(name);
    fastest = std::min(fastest, c.tau);
  };
  for (int i = 0; i < m; ++i)
    add_channel(1 + i, pos.channels[i], -k * beta * pos.channels[i].rho, m == 1 ? "xp" : "xp" + std::to_string(i + 1));
  for (int j = 0; j < n; ++j)
    add_channel(1 + m + j, neg.channels[j], k * (1.0 - beta) * neg.channels[j].rho,
                n == 1 ? "xn" : "xn" + std::to_string(j + 1));
  sys.phi = phi;
  sys.fastest_time_constant = fastest;
  return sys;
}

void MultichannelConfig::validate() const {
  positive.validate();
  negative.validate();
  if (positive.role != BankRole::positive || negative.role != BankRole::negative)
    throw InvalidParameter("bank roles are swapped");
  require_ordering(positive, negative);
  if (!(tau_l > 0.0)) throw InvalidParameter("requires tau_l > 0");
  if (!(k >= 0.0)) throw InvalidParameter("requires gain k >= 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidParameter("requires balance beta in [0, 1]");
  for (double t : all_taus(positive, negative))
    if (t == tau_l) throw InvalidParameter("requires tau_l distinct from the channel time constants");
}

MultichannelConfig random_config(std::mt19937_64& rng, int max_m, int max_n) {
  if (max_m < 1 || max_n < 1) throw InvalidParameter("random banks need at least one channel each");
  std::uniform_int_distribution<int> pick_m(1, max_m);
  std::uniform_int_distribution<int> pick_n(1, max_n);
  std::uniform_real_distribution<double> log_tau(std::log(1e-2), std::log(1e1));
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::uniform_real_distribution<double> balance(0.05, 0.95);
  std::uniform_real_distribution<double> log_gain(std::log(0.1), std::log(100.0));

  const int m = pick_m(rng);
  const int n = pick_n(rng);
  std::vector<double> taus;
  while (static_cast<int>(taus.size()) < m + n) {
    const double t = std::exp(log_tau(rng));
    // Keep neighbouring poles at least 5% apart so the buckets stay resolvable.
    if (std::all_of(taus.begin(), taus.end(), [&](double u) { return std::abs(std::log(t / u)) > 0.05; }))
      taus.push_back(t);
  }
  std::sort(taus.begin(), taus.end());

  auto make_bank = [&](int first, int count, BankRole role) {
    ChannelBank bank{{}, role};
    double sum = 0.0;
    for (int i = 0; i < count; ++i) {
      bank.channels.push_back({weight(rng), taus[first + i]});
      sum += bank.channels.back().rho;
    }
    for (Channel& c : bank.channels) c.rho /= sum;
    return bank;
  };

  MultichannelConfig c;
  c.positive = make_bank(0, m, BankRole::positive);
  c.negative = make_bank(m, n, BankRole::negative);
  c.tau_l = taus.front() / 10.0;
  c.beta = balance(rng);
  c.k = std::exp(log_gain(rng));
  return c;
}

}  // namespace mfa
