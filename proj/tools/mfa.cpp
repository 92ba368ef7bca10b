// Command-line front end: analyze, map, simulate, nyquist, multichannel, interconnect.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfa/errors.hpp"
#include "mfa/io.hpp"

namespace {

using namespace mfa;

struct AmpFlags {
  AmplifierParams params;
  std::string phi = "tanh";
  CLI::Option* k_opt = nullptr;
  CLI::Option* beta_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--tau-l", params.tau_l, "load time constant")->capture_default_str();
    app->add_option("--tau-p", params.tau_p, "positive feedback time constant")->capture_default_str();
    app->add_option("--tau-n", params.tau_n, "negative feedback time constant")->capture_default_str();
    k_opt = app->add_option("--k", params.k, "feedback gain");
    beta_opt = app->add_option("--beta", params.beta, "balance between positive and negative feedback");
    app->add_option("--phi", phi, "static nonlinearity (tanh, arctan)")->capture_default_str();
  }

  AmplifierParams get(bool require_gain = true) const {
    if (require_gain && (k_opt->count() == 0 || beta_opt->count() == 0))
      throw InvalidParameter("--k and --beta are required");
    AmplifierParams p = params;
    p.phi = parse_nonlinearity(phi);
    p.validate();
    return p;
  }
};

struct Output {
  std::string path;
  std::ofstream file;

  std::ostream& stream() {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw ParseError("cannot write '" + path + "'");
    return file;
  }
};

int default_jobs() {
  if (const char* env = std::getenv("MFA_JOBS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw InvalidParameter("MFA_JOBS must be an integer");
    }
  }
  return 0;
}

InputSchedule load_schedule(const std::string& path, std::optional<double> r) {
  if (!path.empty()) return parse_schedule(read_json_file(path));
  return InputSchedule::constant(r.value_or(0.0));
}

Eigen::VectorXd initial_state(const std::vector<double>& ic, int dim) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  if (ic.empty()) {
    x(0) = 0.1;
    return x;
  }
  if (static_cast<int>(ic.size()) != dim)
    throw InvalidParameter("--ic needs " + std::to_string(dim) + " values for this system");
  for (int i = 0; i < dim; ++i) x(i) = ic[i];
  return x;
}

// 10x the slowest lag on the diagonal of A.
double settle_time(const StateSpace& sys) {
  double slowest = 0.0;
  for (Eigen::Index i = 0; i < sys.A.rows(); ++i)
    if (sys.A(i, i) != 0.0) slowest = std::max(slowest, 1.0 / std::abs(sys.A(i, i)));
  return 10.0 * slowest;
}

// Ultimate bound on the amplifier-side states. With a load in the loop the
// amplifier also sees ki ye, so its supremum after settling joins r_max.
bool amplifier_bounded(const Trajectory& traj, const StateSpace& sys, double r_max, double ki) {
  const double settle = settle_time(sys);
  std::vector<int> idx;
  for (std::size_t i = 0; i < traj.state_names.size(); ++i)
    if (traj.state_names[i] != "q" && traj.state_names[i] != "qdot") idx.push_back(static_cast<int>(i));
  if (!traj.extra_names.empty()) {
    const std::vector<double>& ye = traj.series("ye");
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
      if (traj.t[i] >= settle) sup = std::max(sup, std::abs(ye[i]));
    r_max += ki * sup;
  }
  return boundedness_check(traj, r_max, 0.1, settle, idx);
}

void print_warnings(const Trajectory& traj) {
  for (const std::string& w : traj.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed feedback amplifier: dominance analysis, regime maps and simulation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "poles, zero, critical gains, equilibria and regime (JSON)");
  AmpFlags analyze_amp;
  analyze_amp.add(analyze_cmd);
  double analyze_r = 0.0;
  std::optional<double> analyze_lambda;
  int grid_points = FrequencyGrid{}.n_points;
  analyze_cmd->add_option("--r", analyze_r, "constant reference")->capture_default_str();
  analyze_cmd->add_option("--lambda", analyze_lambda, "dominance rate (default: midpoint of the two left-most poles)");
  analyze_cmd->add_option("--grid-points", grid_points, "frequency grid size")->capture_default_str();

  // map
  auto* map_cmd = app.add_subcommand("map", "regime map over a (k, beta) grid (CSV)");
  MapSpec map_spec;
  std::string map_phi = "tanh";
  int jobs = 0;
  Output map_out;
  map_cmd->add_option("--tau-l", map_spec.tau_l)->capture_default_str();
  map_cmd->add_option("--tau-p", map_spec.tau_p)->capture_default_str();
  map_cmd->add_option("--tau-n", map_spec.tau_n)->capture_default_str();
  map_cmd->add_option("--k-min", map_spec.k_min)->capture_default_str();
  map_cmd->add_option("--k-max", map_spec.k_max)->capture_default_str();
  map_cmd->add_option("--beta-min", map_spec.beta_min)->capture_default_str();
  map_cmd->add_option("--beta-max", map_spec.beta_max)->capture_default_str();
  map_cmd->add_option("--rows", map_spec.rows, "number of k values (log-spaced)")->capture_default_str();
  map_cmd->add_option("--cols", map_spec.cols, "number of beta values")->capture_default_str();
  map_cmd->add_option("--lambda", map_spec.lambda)->capture_default_str();
  map_cmd->add_option("--r", map_spec.r)->capture_default_str();
  map_cmd->add_option("--phi", map_phi)->capture_default_str();
  map_cmd->add_option("--jobs", jobs, "worker threads (default: MFA_JOBS or all cores)");
  map_cmd->add_option("--out", map_out.path, "CSV file (default stdout)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "fixed-step RK4 trajectory (CSV), optional oscillation detection");
  AmpFlags sim_amp;
  sim_amp.add(sim_cmd);
  std::vector<double> ic;
  std::string schedule_path, bank_path, sim_load_path;
  std::optional<std::string> sim_coupling;
  std::optional<double> sim_r, dt;
  double horizon = 60.0;
  bool detect = false;
  DetectionOptions detect_opts;
  Output sim_out;
  sim_cmd->add_option("--ic", ic, "initial state (default x = 0.1, others 0)")->delimiter(',');
  sim_cmd->add_option("--schedule", schedule_path, "piecewise-constant reference, JSON [{\"t\":..,\"r\":..}]");
  sim_cmd->add_option("--r", sim_r, "constant reference when no schedule is given");
  sim_cmd->add_option("--dt", dt, "time step (default: fastest time constant / 20)");
  sim_cmd->add_option("--horizon", horizon, "simulated time")->capture_default_str();
  sim_cmd->add_option("--bank", bank_path, "simulate a multichannel bank file instead");
  sim_cmd->add_option("--load", sim_load_path, "close the loop through a load file");
  sim_cmd->add_option("--coupling", sim_coupling, "load coupling sign, overrides the load file (add, subtract)")
      ->check(CLI::IsMember({"add", "subtract"}));
  sim_cmd->add_flag("--detect", detect, "print an oscillation report (JSON) instead of the trajectory");
  sim_cmd->add_option("--transient-fraction", detect_opts.transient_fraction)->capture_default_str();
  sim_cmd->add_option("--amp-threshold", detect_opts.amp_threshold)->capture_default_str();
  sim_cmd->add_option("--out", sim_out.path, "trajectory CSV (default stdout unless --detect)");

  // nyquist
  auto* nyq_cmd = app.add_subcommand("nyquist", "shifted frequency response (CSV) or certificate (JSON)");
  AmpFlags nyq_amp;
  nyq_amp.add(nyq_cmd);
  std::string nyq_load_path;
  std::optional<double> nyq_lambda, omega_min, omega_max, sector;
  int nyq_points = FrequencyGrid{}.n_points;
  int nyq_p = -1;
  bool certificate = false;
  Output nyq_out;
  nyq_cmd->add_option("--load", nyq_load_path, "analyse a load file instead of the amplifier");
  nyq_cmd->add_option("--lambda", nyq_lambda, "rate (default: amplifier rate policy, 0 for loads)");
  nyq_cmd->add_option("--grid-points", nyq_points)->capture_default_str();
  nyq_cmd->add_option("--omega-min", omega_min);
  nyq_cmd->add_option("--omega-max", omega_max);
  nyq_cmd->add_flag("--certificate", certificate, "print the dominance certificate instead of the locus");
  nyq_cmd->add_option("--p", nyq_p, "expected shifted unstable poles (default 2 amplifier, 0 load)");
  nyq_cmd->add_option("--sector", sector, "sector bound K (default: infinite, i.e. passivity)");
  nyq_cmd->add_option("--out", nyq_out.path);

  // multichannel
  auto* mc_cmd = app.add_subcommand("multichannel", "bank analysis and interlacing (JSON)");
  std::string mc_bank_path;
  double mc_r = 0.0;
  std::optional<double> mc_lambda;
  int trials = 0;
  std::uint64_t seed = 1;
  mc_cmd->add_option("--bank", mc_bank_path, "bank file");
  mc_cmd->add_option("--r", mc_r)->capture_default_str();
  mc_cmd->add_option("--lambda", mc_lambda);
  mc_cmd->add_option("--trials", trials, "check interlacing on this many random banks instead");
  mc_cmd->add_option("--seed", seed, "seed for --trials")->capture_default_str();

  // interconnect
  auto* ic_cmd = app.add_subcommand("interconnect", "amplifier + passive load certificates and simulation (JSON)");
  AmpFlags ic_amp;
  ic_amp.add(ic_cmd);
  std::string ic_load_path;
  std::optional<std::string> ic_coupling;
  double ic_lambda = 15.0;
  bool ic_simulate = false;
  double ic_horizon = 50.0;
  std::optional<double> ic_dt;
  std::vector<double> ic_state;
  Output ic_out;
  ic_cmd->add_option("--load", ic_load_path, "load file")->required();
  ic_cmd->add_option("--lambda", ic_lambda, "shared rate")->capture_default_str();
  ic_cmd->add_option("--coupling", ic_coupling, "sign of ki ye in the amplifier reference, overrides the load file (add, subtract)")
      ->check(CLI::IsMember({"add", "subtract"}));
  ic_cmd->add_flag("--simulate", ic_simulate, "simulate the closed loop and detect oscillations");
  ic_cmd->add_option("--horizon", ic_horizon)->capture_default_str();
  ic_cmd->add_option("--dt", ic_dt);
  ic_cmd->add_option("--ic", ic_state, "initial state (x, xp, xn, q, qdot)")->delimiter(',');
  ic_cmd->add_option("--out", ic_out.path, "trajectory CSV when simulating");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze_cmd->parsed()) {
      const AnalysisReport rep = analyze(analyze_amp.get(), analyze_r, analyze_lambda, grid_points);
      std::cout << dump(to_json(rep)) << '\n';
    } else if (map_cmd->parsed()) {
      map_spec.phi = parse_nonlinearity(map_phi);
      if (map_cmd->count("--jobs") == 0) jobs = default_jobs();
      const std::vector<MapCell> cells = dominance_map(map_spec, jobs);
      write_map_csv(map_out.stream(), cells);
    } else if (sim_cmd->parsed()) {
      const InputSchedule schedule = load_schedule(schedule_path, sim_r);
      StateSpace system;
      double ki = 0.0;
      if (!bank_path.empty()) {
        system = parse_bank(read_json_file(bank_path)).realize();
      } else if (!sim_load_path.empty()) {
        LoadFile lf = parse_load(read_json_file(sim_load_path));
        if (sim_coupling) lf.iface.coupling = parse_coupling(*sim_coupling);
        ki = lf.iface.ki;
        system = assemble_closed_loop(sim_amp.get(), lf.load, lf.iface);
      } else {
        system = realize(sim_amp.get());
      }
      const double step = dt.value_or(system.fastest_time_constant / 20.0);
      const Trajectory traj = integrate(system, initial_state(ic, system.dim()), schedule, step, horizon);
      print_warnings(traj);
      if (!sim_out.path.empty() || !detect) write_trajectory_csv(sim_out.stream(), traj);
      if (detect) {
        Json j;
        j["version"] = kVersion;
        j["y"] = to_json(detect_oscillation(traj, detect_opts));
        for (const std::string& name : traj.extra_names)
          j[name] = to_json(detect_oscillation(traj.series(name), traj.dt, detect_opts));
        j["bounded"] = amplifier_bounded(traj, system, schedule.max_abs(), ki);
        std::cout << dump(j) << '\n';
      }
    } else if (nyq_cmd->parsed()) {
      std::optional<RationalTF> g;
      double lambda = 0.0;
      int p = nyq_p;
      if (!nyq_load_path.empty()) {
        g = load_tf(parse_load(read_json_file(nyq_load_path)).load);
        lambda = nyq_lambda.value_or(0.0);
        if (p < 0) p = 0;
      } else {
        const AmplifierParams params = nyq_amp.get();
        g = mixed_amplifier_tf(params);
        lambda = nyq_lambda.value_or(select_rate(params));
        if (p < 0) p = 2;
      }
      FrequencyGrid grid = default_grid(*g, lambda);
      if (omega_min) grid.omega_min = *omega_min;
      if (omega_max) grid.omega_max = *omega_max;
      grid.n_points = nyq_points;
      grid.validate();
      if (certificate) {
        Json j = to_json(check_p_dominance(*g, lambda, sector, p, grid));
        j["version"] = kVersion;
        std::cout << dump(j) << '\n';
      } else {
        write_nyquist_csv(nyq_out.stream(), nyquist_locus(*g, lambda, grid));
      }
    } else if (mc_cmd->parsed()) {
      if (trials > 0) {
        std::mt19937_64 rng(seed);
        Json failures = Json::array();
        int satisfied = 0;
        for (int i = 0; i < trials; ++i) {
          const MultichannelConfig c = random_config(rng);
          const InterlacingReport rep = check_interlacing(c.positive, c.negative, c.beta);
          if (rep.satisfied) {
            ++satisfied;
          } else {
            Json f = to_json(rep);
            f["config"] = to_json(c);
            failures.push_back(f);
          }
        }
        Json j{{"version", kVersion}, {"seed", seed}, {"trials", trials}, {"satisfied", satisfied}, {"failures", failures}};
        std::cout << dump(j) << '\n';
        return failures.empty() ? 0 : 4;
      }
      if (mc_bank_path.empty()) throw InvalidParameter("--bank or --trials is required");
      const MultichannelReport rep = analyze_multichannel(parse_bank(read_json_file(mc_bank_path)), mc_r, mc_lambda);
      std::cout << dump(to_json(rep)) << '\n';
    } else if (ic_cmd->parsed()) {
      InterconnectReport rep;
      rep.amplifier = ic_amp.get();
      rep.load = parse_load(read_json_file(ic_load_path));
      if (ic_coupling) rep.load.iface.coupling = parse_coupling(*ic_coupling);
      rep.lambda = ic_lambda;
      const RationalTF g = mixed_amplifier_tf(rep.amplifier);
      rep.amplifier_certificate = check_p_passivity(g, ic_lambda, 2, default_grid(g, ic_lambda));
      rep.load_certificate = check_load_passivity(rep.load.load, ic_lambda);
      rep.composition = compose_certificates(rep.amplifier_certificate, rep.load_certificate);
      rep.equilibria = closed_loop_equilibria(rep.amplifier, rep.load.load, rep.load.iface, 0.0);
      if (ic_simulate) {
        const StateSpace sys = assemble_closed_loop(rep.amplifier, rep.load.load, rep.load.iface);
        const Trajectory traj = integrate(sys, initial_state(ic_state, sys.dim()), InputSchedule::constant(0.0),
                                          ic_dt.value_or(sys.fastest_time_constant / 20.0), ic_horizon);
        print_warnings(traj);
        rep.y_oscillation = detect_oscillation(traj);
        rep.ye_oscillation = detect_oscillation(traj.series("ye"), traj.dt);
        rep.bounded = amplifier_bounded(traj, sys, 0.0, rep.load.iface.ki);
        if (!ic_out.path.empty()) write_trajectory_csv(ic_out.stream(), traj);
      }
      std::cout << dump(to_json(rep)) << '\n';
    }
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
