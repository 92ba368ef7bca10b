#include "mfa/equilibria.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

constexpr int kScanIntervals = 512;
constexpr double kBisectionTol = 1e-12;
constexpr double kTangentSlope = 1e-7;
constexpr double kTangentResidual = 1e-10;

std::vector<Complex> eigenvalues_of(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  std::vector<Complex> out(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

double bisect(const auto& f, double lo, double hi, double flo) {
  for (int it = 0; it < 200 && hi - lo > kBisectionTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Minimiser of |f| on [lo, hi] by golden section.
double argmin_abs(const auto& f, double lo, double hi) {
  const double inv_phi = 1.0 / std::numbers::phi;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = std::abs(f(c));
  double fd = std::abs(f(d));
  for (int it = 0; it < 200 && hi - lo > kBisectionTol; ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = std::abs(f(c));
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = std::abs(f(d));
    }
  }
  return fc <= fd ? c : d;
}

}  // namespace

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable:
      return "stable";
    case Stability::unstable:
      return "unstable";
    case Stability::marginal:
      return "marginal";
  }
  return "marginal";
}

Equilibrium make_equilibrium(const ScalarRoot& root, Eigen::VectorXd state, const Eigen::MatrixXd& jac) {
  Equilibrium eq;
  eq.y_star = root.y;
  eq.state = std::move(state);
  eq.eigenvalues = eigenvalues_of(jac);
  eq.tangent = root.tangent;
  eq.stability = root.tangent ? Stability::marginal : classify_stability(eq.eigenvalues);
  return eq;
}

double dc_loop_gain(const AmplifierParams& params) { return params.k * (2.0 * params.beta - 1.0); }

std::vector<ScalarRoot> solve_scalar_equilibria(double g, double r, Nonlinearity phi) {
  if (!std::isfinite(g) || !std::isfinite(r)) throw InvalidParameter("equilibrium equation needs finite gain and input");
  auto f = [&](double y) { return g * (apply(phi, y) - r) - y; };
  auto df = [&](double y) { return g * slope(phi, y) - 1.0; };

  const double bound = std::abs(g) * (1.0 + std::abs(r)) + 1.0;
  std::vector<double> ys(kScanIntervals + 1);
  std::vector<double> fs(kScanIntervals + 1);
  for (int i = 0; i <= kScanIntervals; ++i) {
    ys[i] = -bound + 2.0 * bound * i / kScanIntervals;
    fs[i] = f(ys[i]);
  }

  std::vector<ScalarRoot> roots;
  auto push = [&](double y) { roots.push_back({y, std::abs(df(y)) < kTangentSlope}); };
  for (int i = 0; i <= kScanIntervals; ++i) {
    if (fs[i] == 0.0) {
      push(ys[i]);
      continue;
    }
    if (i < kScanIntervals && fs[i + 1] != 0.0 && (fs[i] < 0.0) != (fs[i + 1] < 0.0)) {
      push(bisect(f, ys[i], ys[i + 1], fs[i]));
      continue;
    }
    // Touching without crossing: |f| has a sampled local minimum at i.
    if (i > 0 && i < kScanIntervals && fs[i - 1] != 0.0 && fs[i + 1] != 0.0 &&
        (fs[i - 1] < 0.0) == (fs[i] < 0.0) && (fs[i + 1] < 0.0) == (fs[i] < 0.0) &&
        std::abs(fs[i]) <= std::abs(fs[i - 1]) && std::abs(fs[i]) <= std::abs(fs[i + 1])) {
      const double y = argmin_abs(f, ys[i - 1], ys[i + 1]);
      if (std::abs(f(y)) < kTangentResidual * (1.0 + std::abs(y))) roots.push_back({y, true});
    }
  }
  std::sort(roots.begin(), roots.end(), [](const ScalarRoot& a, const ScalarRoot& b) { return a.y < b.y; });
  return roots;
}

std::vector<Equilibrium> find_equilibria(const AmplifierParams& params, double r) {
  params.validate();
  std::vector<Equilibrium> out;
  for (const ScalarRoot& root : solve_scalar_equilibria(dc_loop_gain(params), r, params.phi)) {
    const double x = r - apply(params.phi, root.y);
    out.push_back(make_equilibrium(root, Eigen::Vector3d(x, x, x), jacobian_at(params, root.y)));
  }
  return out;
}

std::vector<Equilibrium> find_equilibria(const StateSpace& system, double r) {
  system.validate();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system.A);
  if (!lu.isInvertible()) throw NumericalError("singular state matrix: equilibria are not isolated");
  const Eigen::VectorXd a_inv_b = lu.solve(system.input_map);
  const double g = system.output.dot(a_inv_b);
  std::vector<Equilibrium> out;
  for (const ScalarRoot& root : solve_scalar_equilibria(g, r, system.phi)) {
    Eigen::VectorXd x = -a_inv_b * (r - apply(system.phi, root.y));
    Eigen::MatrixXd jac = system.A - slope(system.phi, root.y) * system.input_map * system.output;
    out.push_back(make_equilibrium(root, std::move(x), jac));
  }
  return out;
}

Eigen::Matrix3d jacobian_at(const AmplifierParams& params, double y_star) {
  const double d = slope(params.phi, y_star);
  Eigen::Matrix3d a;
  a << -1.0 / params.tau_l, d * params.k * params.beta / params.tau_l, -d * params.k * (1.0 - params.beta) / params.tau_l,
      1.0 / params.tau_p, -1.0 / params.tau_p, 0.0,
      1.0 / params.tau_n, 0.0, -1.0 / params.tau_n;
  return a;
}

Stability classify_stability(const std::vector<Complex>& eigenvalues, double tol_margin) {
  bool all_stable = true;
  for (const Complex& e : eigenvalues) {
    if (e.real() > tol_margin) return Stability::unstable;
    if (!(e.real() < -tol_margin)) all_stable = false;
  }
  return all_stable ? Stability::stable : Stability::marginal;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::ZeroDominantStable:
      return "ZeroDominantStable";
    case Regime::TwoDominantOscillation:
      return "TwoDominantOscillation";
    case Regime::TwoDominantMultistable:
      return "TwoDominantMultistable";
    case Regime::Unclassified:
      return "Unclassified";
  }
  return "Unclassified";
}

Regime parse_regime(std::string_view name) {
  for (Regime r : {Regime::ZeroDominantStable, Regime::TwoDominantOscillation, Regime::TwoDominantMultistable,
                   Regime::Unclassified})
    if (to_string(r) == name) return r;
  throw ParseError("unknown regime '" + std::string(name) + "'");
}

int RegimeClassification::n_unstable() const {
  return static_cast<int>(std::count_if(equilibria.begin(), equilibria.end(),
                                        [](const Equilibrium& e) { return e.stability == Stability::unstable; }));
}

BalanceCertificates balance_certificates(const AmplifierParams& params, double lambda) {
  return balance_certificates(params, lambda, default_grid(params));
}

BalanceCertificates balance_certificates(const AmplifierParams& params, double lambda, const FrequencyGrid& grid) {
  params.validate();
  BalanceCertificates certs;
  certs.k0_bar = critical_gain(params, 0.0, 0, grid);
  try {
    certs.k2_bar = critical_gain(params, lambda, 2, grid);
  } catch (const NumericalError& e) {
    certs.k2_failure = e.what();
  }
  return certs;
}

RegimeClassification classify_regime(const AmplifierParams& params, double r, double lambda) {
  return classify_regime(params, r, lambda, balance_certificates(params, lambda));
}

BalanceCertificates balance_certificates(const RationalTF& unit_gain_tf, double lambda) {
  BalanceCertificates certs;
  certs.k0_bar = critical_gain(unit_gain_tf, 0.0, 0, default_grid(unit_gain_tf, 0.0));
  try {
    certs.k2_bar = critical_gain(unit_gain_tf, lambda, 2, default_grid(unit_gain_tf, lambda));
  } catch (const NumericalError& e) {
    certs.k2_failure = e.what();
  }
  return certs;
}

RegimeClassification classify_regime(const AmplifierParams& params, double r, double lambda,
                                     const BalanceCertificates& certs) {
  return classify_regime(params.k, find_equilibria(params, r), certs, lambda);
}

RegimeClassification classify_regime(double k, std::vector<Equilibrium> equilibria, const BalanceCertificates& certs,
                                     double lambda) {
  RegimeClassification c;
  c.k0_bar = certs.k0_bar;
  c.k2_bar = certs.k2_bar;
  c.lambda = lambda;
  c.equilibria = std::move(equilibria);

  auto below = [&](const CriticalGain& bar) { return !bar || k < *bar; };
  if (below(c.k0_bar)) {
    c.regime = Regime::ZeroDominantStable;
    return c;
  }
  if (!certs.k2_failure.empty()) {
    c.reason = certs.k2_failure;
    return c;
  }
  if (!below(c.k2_bar)) {
    c.reason = "gain above both critical gains";
    return c;
  }
  const bool any_stable = std::any_of(c.equilibria.begin(), c.equilibria.end(),
                                      [](const Equilibrium& e) { return e.stability == Stability::stable; });
  if (any_stable) {
    c.regime = Regime::TwoDominantMultistable;
  } else if (c.n_unstable() == static_cast<int>(c.equilibria.size())) {
    c.regime = Regime::TwoDominantOscillation;
  } else {
    c.reason = "marginal equilibrium";
  }
  return c;
}

void MapSpec::validate() const {
  if (!(k_min > 0.0) || !(k_max >= k_min)) throw InvalidParameter("map requires 0 < k_min <= k_max");
  if (!(beta_min >= 0.0) || !(beta_max <= 1.0) || !(beta_max >= beta_min))
    throw InvalidParameter("map requires 0 <= beta_min <= beta_max <= 1");
  if (rows < 1 || cols < 1) throw InvalidParameter("map requires at least one row and one column");
  AmplifierParams probe{tau_l, tau_p, tau_n, k_min, beta_min, phi};
  probe.validate();
}

std::vector<double> MapSpec::k_values() const {
  std::vector<double> out(rows);
  if (rows == 1) return {k_min};
  const double a = std::log(k_min);
  const double b = std::log(k_max);
  for (int i = 0; i < rows; ++i) out[i] = std::exp(a + (b - a) * i / (rows - 1));
  out.front() = k_min;
  out.back() = k_max;
  return out;
}

std::vector<double> MapSpec::beta_values() const {
  if (cols == 1) return {beta_min};
  std::vector<double> out(cols);
  for (int j = 0; j < cols; ++j) out[j] = beta_min + (beta_max - beta_min) * j / (cols - 1);
  out.back() = beta_max;
  return out;
}

std::vector<MapCell> dominance_map(const MapSpec& spec, int jobs) {
  spec.validate();
  const std::vector<double> ks = spec.k_values();
  const std::vector<double> betas = spec.beta_values();
  std::vector<MapCell> cells(ks.size() * betas.size());

  auto run_column = [&](std::size_t j) {
    AmplifierParams params{spec.tau_l, spec.tau_p, spec.tau_n, 1.0, betas[j], spec.phi};
    std::optional<BalanceCertificates> certs;
    std::string failure;
    try {
      certs = balance_certificates(params, spec.lambda);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
      MapCell& cell = cells[i * betas.size() + j];
      cell.k = ks[i];
      cell.beta = betas[j];
      if (!certs) {
        cell.classification.reason = failure;
        continue;
      }
      try {
        cell.classification = classify_regime(params.with_gain(ks[i]), spec.r, spec.lambda, *certs);
      } catch (const std::exception& e) {
        cell.classification = RegimeClassification{};
        cell.classification.reason = e.what();
      }
    }
  };

  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(betas.size()));
  if (jobs <= 1) {
    for (std::size_t j = 0; j < betas.size(); ++j) run_column(j);
    return cells;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t j = next++; j < betas.size(); j = next++) run_column(j);
    });
  for (auto& t : workers) t.join();
  return cells;
}

}  // namespace mfa
