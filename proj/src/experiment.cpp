#include "pocp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pocp/error.hpp"
#include "pocp/fem.hpp"
#include "pocp/mesh.hpp"
#include "pocp/timeblock.hpp"

namespace pocp {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Reduced: return "reduced";
    case Method::AllAtOnce: return "all_at_once";
    case Method::None: return "none";
  }
  return "unknown";
}

namespace {

const std::vector<std::string> kTopKeys = {"name", "problem", "discretization", "solver", "sweep", "output"};
const std::vector<std::string> kProblemKeys = {"dim", "T", "lambda", "alpha", "c", "y0", "target"};
const std::vector<std::string> kDataKeys = {"name", "frequency", "amplitude", "rate", "value"};
const std::vector<std::string> kTargetKeys = {"type", "y_omega", "y_q"};
const std::vector<std::string> kDiscKeys = {"dim", "n_elems", "n_per_side", "N", "taus"};
const std::vector<std::string> kSolverKeys = {"method",    "variant", "w_mode", "tol",
                                              "max_iters", "max_eig", "eig_tol"};
const std::vector<std::string> kSweepKeys = {"parameter", "values"};
const std::vector<std::string> kOutputKeys = {"csv", "json"};
const std::vector<std::string> kIntegerKeys = {"dim", "n_elems", "n_per_side", "N", "max_iters"};

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void check_object(const Json& j, const std::string& path) {
  if (!j.is_object()) {
    throw Error(ErrorKind::InvalidValue, "'" + path + "' must be an object", path);
  }
}

void check_keys(const Json& j, const std::vector<std::string>& known, const std::string& path) {
  check_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    std::string msg = "unknown key '" + join_path(path, key) + "'";
    if (auto s = suggest_key(key, known)) msg += "; did you mean '" + *s + "'?";
    throw Error(ErrorKind::UnknownKey, msg, join_path(path, key));
  }
}

double get_number(const Json& obj, const char* key, double fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) {
    throw Error(ErrorKind::InvalidValue, "'" + join_path(path, key) + "' must be a number",
                join_path(path, key));
  }
  return v.get<double>();
}

int get_int(const Json& obj, const char* key, int fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  const std::string field = join_path(path, key);
  if (!v.is_number() || v.get<double>() != std::floor(v.get<double>()) ||
      std::abs(v.get<double>()) > 1e9) {
    throw Error(ErrorKind::InvalidValue, "'" + field + "' must be an integer", field);
  }
  return static_cast<int>(v.get<double>());
}

std::string get_string(const Json& obj, const char* key, const std::string& fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_string()) {
    throw Error(ErrorKind::InvalidValue, "'" + join_path(path, key) + "' must be a string",
                join_path(path, key));
  }
  return v.get<std::string>();
}

bool get_bool(const Json& obj, const char* key, bool fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_boolean()) {
    throw Error(ErrorKind::InvalidValue, "'" + join_path(path, key) + "' must be true or false",
                join_path(path, key));
  }
  return v.get<bool>();
}

[[noreturn]] void bad_choice(const std::string& field, const std::string& got, const std::string& allowed) {
  throw Error(ErrorKind::InvalidValue, "'" + field + "' = '" + got + "'; expected one of " + allowed, field);
}

Json resolve_data(const Json& raw, const std::string& path) {
  check_keys(raw, kDataKeys, path);
  const std::string name = get_string(raw, "name", "zero", path);
  Json out = {{"name", name}};
  if (name == "zero") {
  } else if (name == "constant") {
    out["value"] = get_number(raw, "value", 0.0, path);
  } else if (name == "cos") {
    out["frequency"] = get_number(raw, "frequency", 1.0, path);
    out["amplitude"] = get_number(raw, "amplitude", 1.0, path);
  } else if (name == "cos_decay") {
    out["frequency"] = get_number(raw, "frequency", 1.0, path);
    out["rate"] = get_number(raw, "rate", 0.0, path);
    out["amplitude"] = get_number(raw, "amplitude", 1.0, path);
  } else {
    bad_choice(join_path(path, "name"), name, "zero, constant, cos, cos_decay");
  }
  return out;
}

DataFunction data_from(const Json& d) {
  const std::string name = d.at("name").get<std::string>();
  if (name == "constant") return DataFunction::constant(d.at("value").get<double>());
  if (name == "cos") {
    return DataFunction::cos_product(d.at("frequency").get<double>(), d.at("amplitude").get<double>());
  }
  if (name == "cos_decay") {
    return DataFunction::cos_product_decay(d.at("frequency").get<double>(), d.at("rate").get<double>(),
                                           d.at("amplitude").get<double>());
  }
  return DataFunction::zero();
}

// Validates the raw document and fills in every default.
Json resolve(const Json& raw) {
  check_keys(raw, kTopKeys, "");
  for (const char* section : {"problem", "discretization"}) {
    if (!raw.contains(section)) {
      throw Error(ErrorKind::InvalidValue, std::string("missing section '") + section + "'", section);
    }
  }
  Json out;
  out["name"] = get_string(raw, "name", "experiment", "");

  const Json& rd = raw.at("discretization");
  check_keys(rd, kDiscKeys, "discretization");
  const Json& rp = raw.at("problem");
  check_keys(rp, kProblemKeys, "problem");

  int dim = get_int(rd, "dim", get_int(rp, "dim", 1, "problem"), "discretization");
  if (rp.contains("dim") && get_int(rp, "dim", 1, "problem") != dim) {
    throw Error(ErrorKind::InvalidValue, "problem.dim and discretization.dim differ", "dim");
  }
  Json disc = {{"dim", dim},
               {"n_elems", get_int(rd, "n_elems", 32, "discretization")},
               {"n_per_side", get_int(rd, "n_per_side", 8, "discretization")},
               {"N", get_int(rd, "N", 100, "discretization")}};
  if (rd.contains("taus")) {
    const Json& t = rd.at("taus");
    if (!t.is_array() || !std::all_of(t.begin(), t.end(), [](const Json& v) { return v.is_number(); })) {
      throw Error(ErrorKind::InvalidValue, "'discretization.taus' must be a list of numbers",
                  "discretization.taus");
    }
    disc["taus"] = t;
    if (!rd.contains("N")) disc["N"] = static_cast<int>(t.size());
  }
  out["discretization"] = disc;

  Json prob = {{"dim", dim},
               {"T", get_number(rp, "T", 1.0, "problem")},
               {"lambda", get_number(rp, "lambda", 1.0, "problem")},
               {"alpha", get_number(rp, "alpha", 1.0, "problem")},
               {"c", get_number(rp, "c", 0.0, "problem")}};
  prob["y0"] = resolve_data(rp.value("y0", Json::object()), "problem.y0");
  const Json rt = rp.value("target", Json{{"type", "end_time"}});
  check_keys(rt, kTargetKeys, "problem.target");
  const std::string type = get_string(rt, "type", "end_time", "problem.target");
  if (type == "end_time") {
    if (rt.contains("y_q")) {
      throw Error(ErrorKind::InvalidValue, "end_time target takes y_omega, not y_q", "problem.target.y_q");
    }
    prob["target"] = {{"type", type},
                      {"y_omega", resolve_data(rt.value("y_omega", Json::object()), "problem.target.y_omega")}};
  } else if (type == "tracking") {
    if (rt.contains("y_omega")) {
      throw Error(ErrorKind::InvalidValue, "tracking target takes y_q, not y_omega",
                  "problem.target.y_omega");
    }
    prob["target"] = {{"type", type},
                      {"y_q", resolve_data(rt.value("y_q", Json::object()), "problem.target.y_q")}};
  } else {
    bad_choice("problem.target.type", type, "end_time, tracking");
  }
  out["problem"] = prob;

  const Json rs = raw.value("solver", Json::object());
  check_keys(rs, kSolverKeys, "solver");
  out["solver"] = {{"method", get_string(rs, "method", "reduced", "solver")},
                   {"variant", get_string(rs, "variant", "sym", "solver")},
                   {"w_mode", get_string(rs, "w_mode", "approx", "solver")},
                   {"tol", get_number(rs, "tol", 1e-10, "solver")},
                   {"max_iters", get_int(rs, "max_iters", 1000, "solver")},
                   {"max_eig", get_bool(rs, "max_eig", false, "solver")},
                   {"eig_tol", get_number(rs, "eig_tol", 1e-12, "solver")}};

  const Json ro = raw.value("output", Json::object());
  check_keys(ro, kOutputKeys, "output");
  Json output = Json::object();
  for (const char* k : {"csv", "json"}) {
    if (ro.contains(k)) output[k] = get_string(ro, k, "", "output");
  }
  out["output"] = output;

  if (raw.contains("sweep")) {
    const Json& sw = raw.at("sweep");
    check_keys(sw, kSweepKeys, "sweep");
    const std::string param = get_string(sw, "parameter", "", "sweep");
    if (param.empty()) throw Error(ErrorKind::InvalidValue, "'sweep.parameter' is required", "sweep.parameter");
    const Json values = sw.value("values", Json::array());
    if (!values.is_array() || values.empty() ||
        !std::all_of(values.begin(), values.end(), [](const Json& v) { return v.is_number(); })) {
      throw Error(ErrorKind::InvalidValue, "'sweep.values' must be a nonempty list of numbers",
                  "sweep.values");
    }
    out["sweep"] = {{"parameter", param}, {"values", values}};
  }
  return out;
}

// Numeric leaves of the resolved config as dotted paths.
void numeric_leaves(const Json& j, const std::string& path, std::vector<std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string p = join_path(path, key);
    if (value.is_object()) {
      numeric_leaves(value, p, out);
    } else if (value.is_number()) {
      out.push_back(p);
    }
  }
}

Json::json_pointer resolve_sweep_key(const Json& resolved, const std::string& param) {
  Json body = resolved;
  body.erase("sweep");
  body.erase("output");
  std::vector<std::string> leaves;
  numeric_leaves(body, "", leaves);

  std::vector<std::string> matches;
  if (param.find('.') != std::string::npos) {
    if (std::find(leaves.begin(), leaves.end(), param) != leaves.end()) matches.push_back(param);
  } else {
    for (const auto& leaf : leaves) {
      const auto dot = leaf.rfind('.');
      if (leaf.substr(dot == std::string::npos ? 0 : dot + 1) == param) matches.push_back(leaf);
    }
    // dim lives in both sections and is kept in sync.
    if (param == "dim") matches = {"discretization.dim"};
  }
  if (matches.empty()) {
    std::vector<std::string> names = leaves;
    for (const auto& leaf : leaves) {
      const auto dot = leaf.rfind('.');
      names.push_back(leaf.substr(dot == std::string::npos ? 0 : dot + 1));
    }
    std::string msg = "sweep parameter '" + param + "' is not a numeric config key";
    if (auto s = suggest_key(param, names)) msg += "; did you mean '" + *s + "'?";
    throw Error(ErrorKind::UnknownKey, msg, "sweep.parameter");
  }
  if (matches.size() > 1) {
    throw Error(ErrorKind::InvalidValue, "sweep parameter '" + param + "' is ambiguous; use a dotted key",
                "sweep.parameter");
  }
  std::string pointer = "/" + matches.front();
  std::replace(pointer.begin(), pointer.end(), '.', '/');
  return Json::json_pointer(pointer);
}

void fill_typed(ExperimentConfig& cfg) {
  const Json& r = cfg.resolved;
  cfg.name = r.at("name").get<std::string>();

  const Json& d = r.at("discretization");
  DiscretizationConfig& dc = cfg.discretization;
  dc.dim = d.at("dim").get<int>();
  dc.n_elems = d.at("n_elems").get<int>();
  dc.n_per_side = d.at("n_per_side").get<int>();
  dc.N = d.at("N").get<int>();
  dc.taus.reset();
  if (d.contains("taus")) dc.taus = d.at("taus").get<std::vector<double>>();
  if (dc.dim != 1 && dc.dim != 2) {
    throw Error(ErrorKind::InvalidValue, "dim must be 1 or 2", "discretization.dim");
  }
  if (dc.n_elems < 1) throw Error(ErrorKind::InvalidValue, "n_elems must be >= 1", "discretization.n_elems");
  if (dc.n_per_side < 1) {
    throw Error(ErrorKind::InvalidValue, "n_per_side must be >= 1", "discretization.n_per_side");
  }
  if (dc.N < 1) throw Error(ErrorKind::InvalidValue, "N must be >= 1", "discretization.N");
  if (dc.taus && static_cast<int>(dc.taus->size()) != dc.N) {
    throw Error(ErrorKind::InvalidValue, "taus must have N entries", "discretization.taus");
  }

  const Json& p = r.at("problem");
  ProblemSpec& ps = cfg.problem;
  ps.dim = dc.dim;
  ps.T = p.at("T").get<double>();
  ps.lambda = p.at("lambda").get<double>();
  ps.alpha = p.at("alpha").get<double>();
  ps.c = p.at("c").get<double>();
  ps.y0 = data_from(p.at("y0"));
  const Json& t = p.at("target");
  if (t.at("type") == "tracking") {
    ps.target = TrackingTarget{data_from(t.at("y_q"))};
  } else {
    ps.target = EndTimeTarget{data_from(t.at("y_omega"))};
  }
  const ValidatedProblem vp = validate(ps);  // surfaces NonPositive etc. as config errors

  const Json& s = r.at("solver");
  SolverConfig& sc = cfg.solver;
  const std::string method = s.at("method").get<std::string>();
  if (method == "reduced") sc.method = Method::Reduced;
  else if (method == "all_at_once") sc.method = Method::AllAtOnce;
  else if (method == "none") sc.method = Method::None;
  else bad_choice("solver.method", method, "reduced, all_at_once, none");
  const std::string variant = s.at("variant").get<std::string>();
  if (variant == "sym") sc.variant = SaddleVariant::Sym;
  else if (variant == "disc") sc.variant = SaddleVariant::Disc;
  else bad_choice("solver.variant", variant, "sym, disc");
  const std::string w = s.at("w_mode").get<std::string>();
  if (w == "approx") sc.w_mode = WMode::ApproxW;
  else if (w == "exact") sc.w_mode = WMode::ExactW;
  else bad_choice("solver.w_mode", w, "exact, approx");
  sc.tol = s.at("tol").get<double>();
  sc.max_iters = s.at("max_iters").get<int>();
  sc.max_eig = s.at("max_eig").get<bool>();
  sc.eig_tol = s.at("eig_tol").get<double>();
  if (!(sc.tol > 0.0)) throw Error(ErrorKind::InvalidValue, "tol must be positive", "solver.tol");
  if (!(sc.eig_tol > 0.0)) throw Error(ErrorKind::InvalidValue, "eig_tol must be positive", "solver.eig_tol");
  if (sc.max_iters < 1) throw Error(ErrorKind::InvalidValue, "max_iters must be >= 1", "solver.max_iters");
  if (sc.method == Method::AllAtOnce && vp.is_tracking()) {
    throw Error(ErrorKind::InvalidValue, "all_at_once supports end_time targets only", "solver.method");
  }

  const Json& o = r.at("output");
  cfg.output.csv.reset();
  cfg.output.json.reset();
  if (o.contains("csv")) cfg.output.csv = o.at("csv").get<std::string>();
  if (o.contains("json")) cfg.output.json = o.at("json").get<std::string>();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::optional<std::string> suggest_key(std::string_view key, const std::vector<std::string>& known) {
  std::optional<std::string> best;
  std::size_t best_d = 3;
  for (const auto& k : known) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d && d < std::max<std::size_t>(key.size(), 2)) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

ExperimentConfig parse_config_json(const Json& raw) {
  ExperimentConfig cfg;
  cfg.resolved = resolve(raw);
  fill_typed(cfg);
  if (cfg.resolved.contains("sweep")) {
    const Json& sw = cfg.resolved.at("sweep");
    SweepConfig sc;
    sc.parameter = sw.at("parameter").get<std::string>();
    sc.pointer = resolve_sweep_key(cfg.resolved, sc.parameter);
    sc.values = sw.at("values").get<std::vector<double>>();
    cfg.sweep = sc;
    // Every point must be a valid configuration before anything runs.
    for (double v : sc.values) (void)config_for_point(cfg, v);
  }
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  Json raw;
  try {
    raw = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
  }
  return parse_config_json(raw);
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config file '" + path + "'", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig config_for_point(const ExperimentConfig& cfg, double value) {
  if (!cfg.sweep) return cfg;
  ExperimentConfig out = cfg;
  const Json::json_pointer& ptr = cfg.sweep->pointer;
  const std::string key = ptr.back();
  Json v = value;
  if (std::find(kIntegerKeys.begin(), kIntegerKeys.end(), key) != kIntegerKeys.end()) {
    if (value != std::floor(value)) {
      throw Error(ErrorKind::InvalidValue, "sweep value for '" + key + "' must be an integer",
                  "sweep.values");
    }
    v = static_cast<int>(value);
  }
  out.resolved[ptr] = v;
  if (key == "dim") {
    out.resolved["problem"]["dim"] = v;
    out.resolved["discretization"]["dim"] = v;
  }
  if (key == "N" && out.resolved["discretization"].contains("taus")) {
    throw Error(ErrorKind::InvalidValue, "cannot sweep N with explicit taus", "sweep.parameter");
  }
  fill_typed(out);
  return out;
}

DiscreteProblem build_discrete_problem(const ExperimentConfig& cfg) {
  const DiscretizationConfig& dc = cfg.discretization;
  auto mesh = std::make_shared<const SpatialMesh>(dc.dim == 1 ? build_interval_mesh(dc.n_elems)
                                                              : build_unit_square_mesh(dc.n_per_side));
  auto disc = std::make_shared<const SpatialDiscretization>(make_discretization(mesh));
  const TimeGrid grid = build_time_grid(cfg.problem.T, dc.N, dc.taus);
  return discretize(validate(cfg.problem), disc, grid);
}

RunRecord run_single(const ExperimentConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  RunRecord rec;
  rec.config = cfg.resolved;
  rec.config.erase("sweep");
  rec.config.erase("output");
  try {
    const DiscreteProblem dp = build_discrete_problem(cfg);
    const SolverConfig& sc = cfg.solver;
    if (sc.method != Method::None) {
      ControlSolution sol;
      if (sc.method == Method::Reduced) {
        sol = solve_reduced(dp, sc.tol, sc.max_iters);
      } else {
        sol = solve_all_at_once(dp, sc.w_mode, sc.variant, sc.tol, sc.max_iters).solution;
      }
      rec.iterations = sol.report.iterations;
      rec.residuals = sol.residuals;
      rec.objective = sol.objective;
      rec.termination = std::string(to_string(sol.report.termination));
      if (!sol.report.converged) {
        rec.status = "not_converged";
        rec.message = "solver stopped by " + rec.termination + " at residual " +
                      format_double(sol.report.final_residual());
      }
    }
    if (sc.max_eig) {
      const ReducedOperator op = make_reduced_operator(dp);
      rec.max_eig = lanczos_max_eig(op, sc.eig_tol).value;
    }
  } catch (const Error& e) {
    rec.status = "error";
    rec.message = std::string(to_string(e.kind())) + ": " + e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const ProgressCallback& progress) {
  std::vector<RunRecord> out;
  if (!cfg.sweep) {
    out.push_back(run_single(cfg));
    if (progress) progress(0, out.back());
    return out;
  }
  for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) {
    const double v = cfg.sweep->values[i];
    RunRecord rec = run_single(config_for_point(cfg, v));
    rec.sweep_value = v;
    out.push_back(std::move(rec));
    if (progress) progress(i, out.back());
  }
  return out;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw Error(ErrorKind::InvalidValue, "report format must be csv or json", "format");
}

Json to_json(const RunRecord& r) {
  return Json{{"config", r.config},
              {"sweep_value", r.sweep_value ? Json(*r.sweep_value) : Json(nullptr)},
              {"status", r.status},
              {"message", r.message},
              {"termination", r.termination},
              {"iterations", r.iterations},
              {"residuals",
               {{"state", number_or_null(r.residuals.state)},
                {"adjoint", number_or_null(r.residuals.adjoint)},
                {"gradient", number_or_null(r.residuals.gradient)}}},
              {"objective", number_or_null(r.objective)},
              {"max_eig", r.max_eig ? number_or_null(*r.max_eig) : Json(nullptr)},
              {"wall_ms", r.wall_ms}};
}

RunRecord record_from_json(const Json& j) {
  try {
    RunRecord r;
    r.config = j.at("config");
    if (!j.at("sweep_value").is_null()) r.sweep_value = j.at("sweep_value").get<double>();
    r.status = j.at("status").get<std::string>();
    r.message = j.at("message").get<std::string>();
    r.termination = j.at("termination").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    const Json& res = j.at("residuals");
    r.residuals = {number_from(res.at("state")), number_from(res.at("adjoint")),
                   number_from(res.at("gradient"))};
    r.objective = number_from(j.at("objective"));
    if (!j.at("max_eig").is_null()) r.max_eig = j.at("max_eig").get<double>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed run record: ") + e.what());
  }
}

std::vector<RunRecord> read_records_json(std::istream& in) {
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
  }
  const Json& arr = j.is_object() && j.contains("records") ? j.at("records") : j;
  if (!arr.is_array()) throw Error(ErrorKind::ParseError, "expected a list of run records");
  std::vector<RunRecord> out;
  for (const Json& r : arr) out.push_back(record_from_json(r));
  return out;
}

void emit_report(const std::vector<RunRecord>& records, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::Json) {
    Json arr = Json::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    out << arr.dump(2) << '\n';
    return;
  }
  out << "sweep_value,iterations,res_gradient,res_state,res_adjoint,max_eig,wall_ms,status\n";
  for (const auto& r : records) {
    out << (r.sweep_value ? format_double(*r.sweep_value) : "") << ',' << r.iterations << ','
        << format_double(r.residuals.gradient) << ',' << format_double(r.residuals.state) << ','
        << format_double(r.residuals.adjoint) << ',' << (r.max_eig ? format_double(*r.max_eig) : "")
        << ',' << format_double(r.wall_ms) << ',' << r.status << '\n';
  }
}

void emit_report(const std::vector<RunRecord>& records, ReportFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'", path);
  emit_report(records, format, out);
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed", path);
}

Json to_json(const ClaimCheck& c) {
  return Json{{"name", c.name}, {"passed", c.passed}, {"margin", number_or_null(c.margin)}, {"detail", c.detail}};
}

Json to_json(const SpectrumReport& r) {
  Json clusters = Json::array();
  for (const auto& c : r.clusters) {
    clusters.push_back({{"value", c.value}, {"multiplicity", c.multiplicity}, {"tolerance", c.tolerance}});
  }
  Json checks = Json::array();
  for (const auto& c : r.claim_checks) checks.push_back(to_json(c));
  return Json{{"kind", std::string(to_string(r.kind))},
              {"cluster_tol", r.cluster_tol},
              {"eigenvalues", r.eigenvalues},
              {"clusters", clusters},
              {"claim_checks", checks}};
}

std::vector<ClaimCheck> verify_claims(const ExperimentConfig& cfg, bool include_saddle, int dense_limit) {
  const DiscreteProblem dp = build_discrete_problem(cfg);
  const BlockSystem& bs = *dp.system;
  const double gamma = gamma_bound(cfg.problem.c, cfg.problem.T);
  std::vector<ClaimCheck> out;
  auto append = [&](const std::string& prefix, std::vector<ClaimCheck> checks) {
    for (auto& c : checks) {
      c.name = prefix + c.name;
      out.push_back(std::move(c));
    }
  };
  const SpectrumReport reduced = dense_reduced_spectrum(make_reduced_operator(dp), dense_limit);
  append("reduced.", verify_spectral_claims(reduced, dp.lambda(), gamma, bs.nx(), bs.m()));
  if (include_saddle && !dp.tracking()) {
    for (SaddleVariant v : {SaddleVariant::Sym, SaddleVariant::Disc}) {
      const SaddleSystem sys(dp.system, dp.lambda(), v);
      const SaddlePreconditioner P(sys, WMode::ExactW, dense_limit);
      const SpectrumReport rep = precond_saddle_spectrum(sys, P, dense_limit);
      append("saddle_" + std::string(to_string(v)) + ".",
             verify_spectral_claims(rep, dp.lambda(), gamma, bs.nx(), bs.m()));
    }
  }
  return out;
}

namespace {

Json cos_problem(double lambda, double c) {
  return Json{{"T", 1.0},
              {"alpha", 1.0},
              {"lambda", lambda},
              {"c", c},
              {"y0", {{"name", "cos"}, {"frequency", 1.0}}},
              {"target", {{"type", "end_time"}, {"y_omega", {{"name", "cos"}, {"frequency", 2.0}}}}}};
}

Json eig_problem(double c) { return Json{{"T", 1.0}, {"alpha", 1.0}, {"lambda", 1.0}, {"c", c}}; }

Json make_preset(const std::string& name, Json problem, Json disc, Json solver, const std::string& param,
                 Json values) {
  return Json{{"name", name},
              {"problem", std::move(problem)},
              {"discretization", std::move(disc)},
              {"solver", std::move(solver)},
              {"sweep", {{"parameter", param}, {"values", std::move(values)}}}};
}

std::vector<Preset> build_presets() {
  const Json eig_solver = {{"method", "none"}, {"max_eig", true}};
  const Json cg = {{"method", "reduced"}, {"tol", 1e-10}};
  const Json minres = {{"method", "all_at_once"}, {"w_mode", "approx"}, {"variant", "sym"}, {"tol", 1e-8}};
  std::vector<Preset> p;
  p.push_back({"c-eig-sweep", "largest eigenvalue of the reduced operator for c in {100, 10, 1, -1}",
               make_preset("c-eig-sweep", eig_problem(0.0), {{"dim", 1}, {"n_elems", 63}, {"N", 1000}},
                           eig_solver, "c", {100.0, 10.0, 1.0, -1.0})});
  p.push_back({"h-independence", "largest eigenvalue under spatial refinement (c = 1, N = 500)",
               make_preset("h-independence", eig_problem(1.0), {{"dim", 1}, {"n_elems", 15}, {"N", 500}},
                           eig_solver, "n_elems", {15, 31, 63, 127})});
  p.push_back({"N-independence", "largest eigenvalue under time refinement (c = 1)",
               make_preset("N-independence", eig_problem(1.0), {{"dim", 1}, {"n_elems", 31}, {"N", 100}},
                           eig_solver, "N", {100, 250, 500, 1000})});
  p.push_back({"alpha-eig-sweep", "largest eigenvalue for alpha in {0, 0.1, 1, 10, 100}",
               make_preset("alpha-eig-sweep", eig_problem(1.0), {{"dim", 1}, {"n_elems", 63}, {"N", 500}},
                           eig_solver, "alpha", {0.0, 0.1, 1.0, 10.0, 100.0})});
  p.push_back({"lambda-cg-sweep", "CG iterations for lambda from 1 down to 1e-5 (c = -5, N = 100)",
               make_preset("lambda-cg-sweep", cos_problem(1e-3, -5.0), {{"dim", 1}, {"n_elems", 127}, {"N", 100}},
                           cg, "lambda", {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5})});
  p.push_back({"N-cg-sweep", "CG iterations for N in {50, 100, 200, 400} (lambda = 1e-3, c = -5)",
               make_preset("N-cg-sweep", cos_problem(1e-3, -5.0), {{"dim", 1}, {"n_elems", 127}, {"N", 100}},
                           cg, "N", {50, 100, 200, 400})});
  p.push_back({"c-cg-sweep", "CG iterations for c from 10 down to -9 (lambda = 1e-3, N = 100)",
               make_preset("c-cg-sweep", cos_problem(1e-3, 0.0), {{"dim", 1}, {"n_elems", 127}, {"N", 100}},
                           cg, "c", {10.0, 5.0, 0.0, -5.0, -9.0})});
  p.push_back({"N-minres-sweep", "MINRES iterations with the approximate W for N in {20, 50, 100, 200}",
               make_preset("N-minres-sweep", cos_problem(1e-3, -5.0), {{"dim", 1}, {"n_elems", 127}, {"N", 100}},
                           minres, "N", {20, 50, 100, 200})});
  p.push_back({"lambda-minres-sweep", "MINRES iterations for lambda from 100 down to 1e-4 (c = -5, N = 100)",
               make_preset("lambda-minres-sweep", cos_problem(1e-3, -5.0),
                           {{"dim", 1}, {"n_elems", 127}, {"N", 100}}, minres, "lambda",
                           {100.0, 1.0, 5e-2, 1e-2, 4e-3, 3e-3, 1e-4})});
  p.push_back({"c-minres-sweep", "MINRES iterations for c from 10 down to -8 (lambda = 1e-3, N = 100)",
               make_preset("c-minres-sweep", cos_problem(1e-3, 0.0), {{"dim", 1}, {"n_elems", 127}, {"N", 100}},
                           minres, "c", {10.0, 5.0, 0.0, -5.0, -8.0})});
  return p;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build_presets();
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::vector<std::string> names;
  for (const auto& p : presets()) names.push_back(p.name);
  std::string msg = "unknown preset '" + std::string(name) + "'";
  if (auto s = suggest_key(name, names)) msg += "; did you mean '" + *s + "'?";
  throw Error(ErrorKind::InvalidValue, msg, "preset");
}

}  // namespace pocp
