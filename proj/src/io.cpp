#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mfa/errors.hpp"
#include "mfa/io.hpp"

namespace mfa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// JSON has no inf/nan: write them as strings / null.
Json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double get_num(const Json& j) {
  if (j.is_null()) return kNaN;
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ParseError("expected a number, got \"" + s + "\"");
  }
  if (!j.is_number()) throw ParseError("expected a number");
  return j.get<double>();
}

Json gain_json(const CriticalGain& g) { return g ? Json(num(*g)) : Json("unbounded"); }

CriticalGain gain_from(const Json& j) {
  if (j.is_string() && j.get_ref<const std::string&>() == "unbounded") return std::nullopt;
  return get_num(j);
}

Json complex_json(Complex z) { return Json{{"re", num(z.real())}, {"im", num(z.imag())}}; }

Complex complex_from(const Json& j) { return {get_num(j.at("re")), get_num(j.at("im"))}; }

Json complex_list(const std::vector<Complex>& zs) {
  Json a = Json::array();
  for (const Complex& z : zs) a.push_back(complex_json(z));
  return a;
}

std::vector<Complex> complex_list_from(const Json& j) {
  std::vector<Complex> out;
  for (const Json& e : j) out.push_back(complex_from(e));
  return out;
}

Json equilibria_json(const std::vector<Equilibrium>& eqs) {
  Json a = Json::array();
  for (const Equilibrium& e : eqs) a.push_back(to_json(e));
  return a;
}

Stability parse_stability(const std::string& s) {
  if (s == "stable") return Stability::stable;
  if (s == "unstable") return Stability::unstable;
  if (s == "marginal") return Stability::marginal;
  throw ParseError("unknown stability '" + s + "'");
}

double require_number(const Json& obj, const char* key) {
  if (!obj.is_object()) throw ParseError("expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

ChannelBank parse_channels(const Json& j, BankRole role, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
  ChannelBank bank{{}, role};
  for (const Json& c : *it) bank.channels.push_back({require_number(c, "rho"), require_number(c, "tau")});
  return bank;
}

Json channels_json(const ChannelBank& bank) {
  Json a = Json::array();
  for (const Channel& c : bank.channels) a.push_back(Json{{"rho", c.rho}, {"tau", c.tau}});
  return a;
}

template <class F>
auto translate(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const RationalTF& g) {
  Json j;
  j["num"] = Json::array();
  for (double c : g.num().coeffs()) j["num"].push_back(c);
  j["den"] = Json::array();
  for (double c : g.den().coeffs()) j["den"].push_back(c);
  return j;
}

RationalTF rational_tf_from_json(const Json& j) {
  return translate([&] {
    return RationalTF(Polynomial(j.at("num").get<std::vector<double>>()),
                      Polynomial(j.at("den").get<std::vector<double>>()));
  });
}

Json to_json(const AmplifierParams& p) {
  return Json{{"tau_l", p.tau_l}, {"tau_p", p.tau_p}, {"tau_n", p.tau_n},
              {"k", p.k},         {"beta", p.beta},   {"phi", std::string(to_string(p.phi))}};
}

AmplifierParams amplifier_params_from_json(const Json& j) {
  return translate([&] {
    AmplifierParams p;
    p.tau_l = require_number(j, "tau_l");
    p.tau_p = require_number(j, "tau_p");
    p.tau_n = require_number(j, "tau_n");
    p.k = require_number(j, "k");
    p.beta = require_number(j, "beta");
    if (j.contains("phi")) p.phi = parse_nonlinearity(j.at("phi").get<std::string>());
    return p;
  });
}

Json to_json(const Equilibrium& e) {
  Json state = Json::array();
  for (double v : e.state) state.push_back(num(v));
  return Json{{"y", num(e.y_star)},
              {"state", state},
              {"eigenvalues", complex_list(e.eigenvalues)},
              {"stability", std::string(to_string(e.stability))},
              {"tangent", e.tangent}};
}

Equilibrium equilibrium_from_json(const Json& j) {
  return translate([&] {
    Equilibrium e;
    e.y_star = get_num(j.at("y"));
    const Json& s = j.at("state");
    e.state.resize(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) e.state(static_cast<Eigen::Index>(i)) = get_num(s[i]);
    e.eigenvalues = complex_list_from(j.at("eigenvalues"));
    e.stability = parse_stability(j.at("stability").get<std::string>());
    e.tangent = j.at("tangent").get<bool>();
    return e;
  });
}

Json to_json(const AnalysisReport& r) {
  Json j;
  j["version"] = r.version;
  j["params"] = to_json(r.params);
  j["r"] = num(r.r);
  j["poles"] = complex_list(r.poles);
  j["zero"] = r.zero.is_infinite() ? Json("infinite") : num(*r.zero.value);
  j["beta_star"] = num(r.beta_star);
  j["lambda"] = num(r.lambda);
  j["lambda_policy"] = r.lambda_policy;
  j["k0_bar"] = gain_json(r.k0_bar);
  j["k2_bar"] = gain_json(r.k2_bar);
  if (!r.k2_failure.empty()) j["k2_failure"] = r.k2_failure;
  j["equilibria"] = equilibria_json(r.equilibria);
  j["regime"] = std::string(to_string(r.regime));
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["grid"] = Json{{"omega_min", r.grid.omega_min},
                   {"omega_max", r.grid.omega_max},
                   {"n_points", r.grid.n_points},
                   {"refinement_tol", r.grid.refinement_tol}};
  return j;
}

AnalysisReport analysis_report_from_json(const Json& j) {
  return translate([&] {
    AnalysisReport r;
    r.version = j.at("version").get<std::string>();
    r.params = amplifier_params_from_json(j.at("params"));
    r.r = get_num(j.at("r"));
    r.poles = complex_list_from(j.at("poles"));
    const Json& z = j.at("zero");
    if (!(z.is_string() && z.get_ref<const std::string&>() == "infinite")) r.zero.value = get_num(z);
    r.beta_star = get_num(j.at("beta_star"));
    r.lambda = get_num(j.at("lambda"));
    r.lambda_policy = j.at("lambda_policy").get<std::string>();
    r.k0_bar = gain_from(j.at("k0_bar"));
    r.k2_bar = gain_from(j.at("k2_bar"));
    r.k2_failure = j.value("k2_failure", "");
    for (const Json& e : j.at("equilibria")) r.equilibria.push_back(equilibrium_from_json(e));
    r.regime = parse_regime(j.at("regime").get<std::string>());
    r.reason = j.value("reason", "");
    const Json& g = j.at("grid");
    r.grid.omega_min = g.at("omega_min").get<double>();
    r.grid.omega_max = g.at("omega_max").get<double>();
    r.grid.n_points = g.at("n_points").get<int>();
    r.grid.refinement_tol = g.at("refinement_tol").get<double>();
    return r;
  });
}

Json to_json(const DominanceCertificate& c) {
  Json j;
  j["p"] = c.p;
  j["lambda"] = num(c.lambda);
  j["sector"] = c.sector ? Json(num(*c.sector)) : Json("infinite");
  j["min_re"] = num(c.min_re);
  j["omega_at_min"] = num(c.omega_at_min);
  j["critical_gain"] = gain_json(c.critical_gain);
  j["conditions"] = Json::array({c.conditions[0], c.conditions[1], c.conditions[2]});
  j["margin"] = num(c.margin);
  j["passed"] = c.passed;
  if (!c.diagnostic.empty()) j["diagnostic"] = c.diagnostic;
  return j;
}

Json to_json(const CompositionCertificate& c) {
  Json j{{"p_amplifier", c.p_amplifier}, {"p_load", c.p_load}, {"lambda", num(c.lambda)},
         {"p_total", c.p_total},         {"valid", c.valid}};
  if (!c.reason.empty()) j["reason"] = c.reason;
  return j;
}

Json to_json(const OscillationReport& o) {
  Json j;
  j["oscillating"] = o.oscillating;
  j["amplitude"] = num(o.amplitude);
  j["period"] = o.period ? Json(num(*o.period)) : Json(nullptr);
  j["period_zero_crossing"] = num(o.period_zero_crossing);
  j["period_autocorrelation"] = num(o.period_autocorrelation);
  j["agreement"] = num(o.agreement);
  j["crossings"] = o.crossings;
  return j;
}

Json to_json(const InterlacingReport& r) {
  Json zeros = Json::array();
  for (std::size_t i = 0; i < r.zeros.size(); ++i) {
    Json z = complex_json(r.zeros[i]);
    if (i < r.buckets.size()) z["bucket"] = std::string(to_string(r.buckets[i]));
    zeros.push_back(z);
  }
  Json j{{"zeros", zeros},
         {"between_positive", r.between_positive},
         {"between_negative", r.between_negative},
         {"outer", r.outer},
         {"satisfied", r.satisfied}};
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

Json to_json(const MultichannelConfig& c) {
  return Json{{"tau_l", c.tau_l},
              {"positive", channels_json(c.positive)},
              {"negative", channels_json(c.negative)},
              {"k", c.k},
              {"beta", c.beta},
              {"phi", std::string(to_string(c.phi))}};
}

Json to_json(const MultichannelReport& r) {
  Json j;
  j["version"] = r.version;
  j["config"] = to_json(r.config);
  j["r"] = num(r.r);
  j["poles"] = complex_list(r.poles);
  j["interlacing"] = to_json(r.interlacing);
  j["outer_zero_limit_beta"] = num(r.outer_zero_limit_beta);
  j["lambda"] = num(r.lambda);
  j["lambda_policy"] = r.lambda_policy;
  j["k0_bar"] = gain_json(r.k0_bar);
  j["k2_bar"] = gain_json(r.k2_bar);
  if (!r.k2_failure.empty()) j["k2_failure"] = r.k2_failure;
  j["equilibria"] = equilibria_json(r.equilibria);
  j["regime"] = std::string(to_string(r.regime));
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

Json to_json(const LoadFile& f) {
  return Json{{"a", f.load.a},   {"b", f.load.b},   {"kv", f.load.kv},
              {"kp", f.load.kp}, {"ki", f.iface.ki}, {"ko", f.iface.ko},
              {"coupling", std::string(to_string(f.iface.coupling))}};
}

Json to_json(const InterconnectReport& r) {
  Json j;
  j["version"] = r.version;
  j["amplifier"] = to_json(r.amplifier);
  j["load"] = to_json(r.load);
  j["lambda"] = num(r.lambda);
  j["amplifier_certificate"] = to_json(r.amplifier_certificate);
  j["load_certificate"] = to_json(r.load_certificate);
  j["composition"] = to_json(r.composition);
  j["equilibria"] = equilibria_json(r.equilibria);
  if (r.y_oscillation) j["y_oscillation"] = to_json(*r.y_oscillation);
  if (r.ye_oscillation) j["ye_oscillation"] = to_json(*r.ye_oscillation);
  if (r.bounded) j["bounded"] = *r.bounded;
  return j;
}

Json to_json(const InputSchedule& s) {
  Json a = Json::array();
  for (const ScheduleSegment& seg : s.segments) a.push_back(Json{{"t", seg.t_start}, {"r", seg.value}});
  return a;
}

InputSchedule parse_schedule(const Json& j) {
  if (!j.is_array()) throw ParseError("schedule must be a JSON array of {\"t\", \"r\"} objects");
  InputSchedule s;
  s.segments.clear();
  for (const Json& e : j) s.segments.push_back({require_number(e, "t"), require_number(e, "r")});
  s.validate();
  return s;
}

MultichannelConfig parse_bank(const Json& j) {
  if (!j.is_object()) throw ParseError("bank file must be a JSON object");
  MultichannelConfig c;
  c.tau_l = require_number(j, "tau_l");
  c.positive = parse_channels(j, BankRole::positive, "positive");
  c.negative = parse_channels(j, BankRole::negative, "negative");
  c.k = require_number(j, "k");
  c.beta = require_number(j, "beta");
  if (j.contains("phi")) c.phi = parse_nonlinearity(translate([&] { return j.at("phi").get<std::string>(); }));
  c.validate();
  return c;
}

LoadFile parse_load(const Json& j) {
  if (!j.is_object()) throw ParseError("load file must be a JSON object");
  LoadFile f;
  f.load = {require_number(j, "a"), require_number(j, "b"), require_number(j, "kv"), require_number(j, "kp")};
  f.iface.ki = require_number(j, "ki");
  f.iface.ko = require_number(j, "ko");
  if (j.contains("coupling")) {
    if (!j.at("coupling").is_string()) throw ParseError("'coupling' must be a string");
    f.iface.coupling = parse_coupling(j.at("coupling").get<std::string>());
  }
  f.load.validate();
  f.iface.validate();
  return f;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2); }

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "# " << kVersion << "\n";
  os << "t";
  for (const std::string& n : traj.state_names) os << ',' << n;
  os << ",y";
  for (const std::string& n : traj.extra_names) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << format_double(traj.t[i]);
    for (double v : traj.state(i)) os << ',' << format_double(v);
    os << ',' << format_double(traj.y[i]);
    for (const auto& e : traj.extra) os << ',' << format_double(e[i]);
    os << '\n';
  }
}

void write_map_csv(std::ostream& os, const std::vector<MapCell>& cells) {
  os << "# " << kVersion << "\n";
  os << "k,beta,regime,k0_bar,k2_bar,n_equilibria,n_unstable\n";
  auto gain = [](const CriticalGain& g) { return g ? format_double(*g) : std::string("unbounded"); };
  for (const MapCell& c : cells) {
    const RegimeClassification& rc = c.classification;
    os << format_double(c.k) << ',' << format_double(c.beta) << ',' << to_string(rc.regime) << ','
       << gain(rc.k0_bar) << ',' << gain(rc.k2_bar) << ',' << rc.equilibria.size() << ',' << rc.n_unstable() << '\n';
  }
}

void write_nyquist_csv(std::ostream& os, const std::vector<NyquistSample>& locus) {
  os << "# " << kVersion << "\n";
  os << "omega,re,im\n";
  for (const NyquistSample& s : locus)
    os << format_double(s.omega) << ',' << format_double(s.value.real()) << ',' << format_double(s.value.imag())
       << '\n';
}

}  // namespace mfa
