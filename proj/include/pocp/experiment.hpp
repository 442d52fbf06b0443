#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pocp/problem.hpp"
#include "pocp/reduced.hpp"
#include "pocp/saddle.hpp"
#include "pocp/spectra.hpp"

namespace pocp {

using Json = nlohmann::json;

struct DiscretizationConfig {
  int dim = 1;
  int n_elems = 32;     // 1D
  int n_per_side = 8;   // 2D
  int N = 100;
  std::optional<std::vector<double>> taus;
};

enum class Method { Reduced, AllAtOnce, None };
std::string_view to_string(Method m);

struct SolverConfig {
  Method method = Method::Reduced;
  SaddleVariant variant = SaddleVariant::Sym;
  WMode w_mode = WMode::ApproxW;
  double tol = 1e-10;
  int max_iters = 1000;
  bool max_eig = false;
  double eig_tol = 1e-12;
};

struct SweepConfig {
  std::string parameter;       // as written in the config
  Json::json_pointer pointer;  // resolved location, e.g. /problem/c
  std::vector<double> values;
};

struct OutputConfig {
  std::optional<std::string> csv;
  std::optional<std::string> json;
};

/// Parsed, validated experiment. `resolved` is the full configuration with
/// defaults applied; the typed sections are derived from it.
struct ExperimentConfig {
  std::string name;
  Json resolved;
  ProblemSpec problem;
  DiscretizationConfig discretization;
  SolverConfig solver;
  std::optional<SweepConfig> sweep;
  OutputConfig output;

  /// Number of runs run_experiment will perform.
  std::size_t run_count() const { return sweep ? sweep->values.size() : 1; }
};

/// Throws ParseError (malformed JSON), UnknownKey (with a suggestion when a
/// known key is close) or InvalidValue.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_json(const Json& raw);
ExperimentConfig parse_config_text(std::string_view text);

/// Config for one sweep point: the base with the swept key replaced.
ExperimentConfig config_for_point(const ExperimentConfig& cfg, double value);

struct RunRecord {
  Json config;
  std::optional<double> sweep_value;
  std::string status = "ok";   // ok | not_converged | error
  std::string message;
  std::string termination;
  int iterations = 0;
  KktResiduals residuals;
  double objective = 0.0;
  std::optional<double> max_eig;
  double wall_ms = 0.0;

  bool flagged() const { return status != "ok"; }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Runs a single configuration (the sweep, if any, is ignored).
RunRecord run_single(const ExperimentConfig& cfg);

using ProgressCallback = std::function<void(std::size_t index, const RunRecord&)>;

/// Runs every sweep point in order. Solver failures become flagged records.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(std::string_view s);

/// CSV columns: sweep_value, iterations, res_gradient, res_state,
/// res_adjoint, max_eig, wall_ms, status. Optional values are left empty.
void emit_report(const std::vector<RunRecord>& records, ReportFormat format, std::ostream& out);
void emit_report(const std::vector<RunRecord>& records, ReportFormat format, const std::string& path);

Json to_json(const RunRecord& r);
RunRecord record_from_json(const Json& j);
std::vector<RunRecord> read_records_json(std::istream& in);

Json to_json(const SpectrumReport& r);
Json to_json(const ClaimCheck& c);

struct Preset {
  std::string name;
  std::string description;
  Json config;
};

const std::vector<Preset>& presets();
/// Throws InvalidValue for an unknown name.
const Preset& find_preset(std::string_view name);

/// Spatial mesh, time grid and discrete problem for a configuration.
DiscreteProblem build_discrete_problem(const ExperimentConfig& cfg);

/// Dense claim checks on the configured instance: eigenvalue inclusion in
/// [lambda, lambda + gamma] (gamma = gamma_bound(c, T)) and the count above
/// lambda for the reduced operator; with `include_saddle`, multiplicities of
/// both preconditioned saddle systems (exact W). Names are prefixed with
/// "reduced.", "saddle_sym." and "saddle_disc.".
std::vector<ClaimCheck> verify_claims(const ExperimentConfig& cfg, bool include_saddle = true,
                                      int dense_limit = kDenseLimit);

/// Closest key by edit distance, if within distance 2.
std::optional<std::string> suggest_key(std::string_view key, const std::vector<std::string>& known);

}  // namespace pocp
