#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfa/equilibria.hpp"
#include "mfa/interconnect.hpp"
#include "mfa/multichannel.hpp"
#include "mfa/sim.hpp"

namespace mfa {

inline constexpr const char* kVersion = "mfa 0.1.0";

// %.17g; "inf", "-inf", "nan" for the non-finite values.
std::string format_double(double v);

// ---------------------------------------------------------------- reports

struct AnalysisReport {
  AmplifierParams params;
  double r = 0.0;
  std::vector<Complex> poles;
  ZeroLocation zero;
  double beta_star = 0.0;
  double lambda = 0.0;
  std::string lambda_policy;
  CriticalGain k0_bar;
  CriticalGain k2_bar;
  std::string k2_failure;
  std::vector<Equilibrium> equilibria;
  Regime regime = Regime::Unclassified;
  std::string reason;
  std::string version = kVersion;
  FrequencyGrid grid;
};

inline constexpr const char* kRatePolicyMidpoint = "midpoint of the two left-most poles";
inline constexpr const char* kRatePolicyUser = "user";

// Everything the analyze command prints. lambda defaults to select_rate.
AnalysisReport analyze(const AmplifierParams& params, double r, std::optional<double> lambda = std::nullopt,
                       int grid_points = FrequencyGrid{}.n_points);

// Regime recomputed from the embedded certificates and equilibria.
Regime recompute_regime(const AnalysisReport& report);

struct MultichannelReport {
  MultichannelConfig config;
  double r = 0.0;
  std::vector<Complex> poles;
  InterlacingReport interlacing;
  double outer_zero_limit_beta = 0.0;
  double lambda = 0.0;
  std::string lambda_policy;
  CriticalGain k0_bar;
  CriticalGain k2_bar;
  std::string k2_failure;
  std::vector<Equilibrium> equilibria;
  Regime regime = Regime::Unclassified;
  std::string reason;
  std::string version = kVersion;
};

MultichannelReport analyze_multichannel(const MultichannelConfig& config, double r,
                                        std::optional<double> lambda = std::nullopt);

// Fields of a load file: the load itself plus the interface gains.
struct LoadFile {
  LoadParams load;
  InterfaceGains iface;
};

struct InterconnectReport {
  AmplifierParams amplifier;
  LoadFile load;
  double lambda = 0.0;
  DominanceCertificate amplifier_certificate;
  DominanceCertificate load_certificate;
  CompositionCertificate composition;
  std::vector<Equilibrium> equilibria;
  std::optional<OscillationReport> y_oscillation;
  std::optional<OscillationReport> ye_oscillation;
  std::optional<bool> bounded;
  std::string version = kVersion;
};

// ---------------------------------------------------------------- JSON

using Json = nlohmann::ordered_json;

Json to_json(const RationalTF& g);
RationalTF rational_tf_from_json(const Json& j);

Json to_json(const AmplifierParams& p);
AmplifierParams amplifier_params_from_json(const Json& j);

Json to_json(const Equilibrium& e);
Equilibrium equilibrium_from_json(const Json& j);

Json to_json(const AnalysisReport& r);
AnalysisReport analysis_report_from_json(const Json& j);

Json to_json(const DominanceCertificate& c);
Json to_json(const CompositionCertificate& c);
Json to_json(const OscillationReport& o);
Json to_json(const InterlacingReport& r);
Json to_json(const MultichannelConfig& c);
Json to_json(const MultichannelReport& r);
Json to_json(const LoadFile& f);
Json to_json(const InterconnectReport& r);
Json to_json(const InputSchedule& s);

// Parsers throw ParseError on malformed documents and let InvalidParameter
// from the domain validation through.
InputSchedule parse_schedule(const Json& j);
MultichannelConfig parse_bank(const Json& j);
LoadFile parse_load(const Json& j);

Json read_json_file(const std::string& path);
std::string dump(const Json& j);

// ---------------------------------------------------------------- CSV

// Header: "# <version>" line, then "t,<states>,y,<extra outputs>".
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_map_csv(std::ostream& os, const std::vector<MapCell>& cells);
// omega,re,im; samples next to a pole are written as nan.
void write_nyquist_csv(std::ostream& os, const std::vector<NyquistSample>& locus);

}  // namespace mfa
