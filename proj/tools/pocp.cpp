// pocp: command-line front end for the parabolic optimal control solvers.
//
//   pocp solve   CONFIG            one run (sweep section ignored)
//   pocp sweep   CONFIG|--preset   every sweep point, report as CSV/JSON
//   pocp eig     CONFIG            reduced (or preconditioned saddle) spectrum
//   pocp verify  CONFIG            eigenvalue claim checks; exit 2 on failure
//   pocp presets                   list built-in experiment grids
//
// Exit codes: 0 success, 1 configuration or input error, 2 failed claim.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pocp/error.hpp"
#include "pocp/experiment.hpp"
#include "pocp/spectra.hpp"
#include "pocp/timeblock.hpp"

namespace {

struct Source {
  std::string config;
  std::string preset;
};

void add_source(CLI::App* cmd, Source& src) {
  cmd->add_option("config", src.config, "JSON configuration file");
  cmd->add_option("--preset", src.preset, "use a built-in preset instead of a file");
}

pocp::ExperimentConfig load(const Source& src) {
  if (!src.preset.empty()) {
    if (!src.config.empty()) {
      throw pocp::Error(pocp::ErrorKind::InvalidValue, "give either a config file or --preset, not both");
    }
    return pocp::parse_config_json(pocp::find_preset(src.preset).config);
  }
  if (src.config.empty()) throw pocp::Error(pocp::ErrorKind::InvalidValue, "no configuration given");
  return pocp::parse_config(src.config);
}

void print_record(const pocp::RunRecord& r) {
  if (r.sweep_value) std::printf("%-12.6g ", *r.sweep_value);
  std::printf("iters %4d  grad %.3e  state %.3e  adj %.3e", r.iterations, r.residuals.gradient,
              r.residuals.state, r.residuals.adjoint);
  if (r.max_eig) std::printf("  max_eig %.10g", *r.max_eig);
  std::printf("  %.1f ms  %s", r.wall_ms, r.status.c_str());
  if (!r.message.empty()) std::printf(" (%s)", r.message.c_str());
  std::printf("\n");
}

void write_outputs(const std::vector<pocp::RunRecord>& records, const pocp::ExperimentConfig& cfg,
                   const std::string& csv, const std::string& json) {
  const std::string csv_path = !csv.empty() ? csv : cfg.output.csv.value_or("");
  const std::string json_path = !json.empty() ? json : cfg.output.json.value_or("");
  if (!csv_path.empty()) pocp::emit_report(records, pocp::ReportFormat::Csv, csv_path);
  if (!json_path.empty()) pocp::emit_report(records, pocp::ReportFormat::Json, json_path);
}

void write_spectrum(const pocp::SpectrumReport& rep, const std::string& csv, const std::string& json) {
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw pocp::Error(pocp::ErrorKind::IoError, "cannot write '" + csv + "'", csv);
    pocp::write_eigenvalues_csv(out, rep);
  }
  if (!json.empty()) {
    std::ofstream out(json);
    if (!out) throw pocp::Error(pocp::ErrorKind::IoError, "cannot write '" + json + "'", json);
    out << pocp::to_json(rep).dump(2) << '\n';
  }
}

void print_clusters(const pocp::SpectrumReport& rep) {
  std::printf("%zu eigenvalues in [%.12g, %.12g], %zu clusters (tol %.1e)\n", rep.eigenvalues.size(),
              rep.eigenvalues.front(), rep.eigenvalues.back(), rep.clusters.size(), rep.cluster_tol);
  const std::size_t shown = std::min<std::size_t>(rep.clusters.size(), 12);
  for (std::size_t i = 0; i < shown; ++i) {
    std::printf("  %.12g  x%d\n", rep.clusters[i].value, rep.clusters[i].multiplicity);
  }
  if (shown < rep.clusters.size()) std::printf("  ... %zu more\n", rep.clusters.size() - shown);
}

bool print_checks(const std::string& label, const std::vector<pocp::ClaimCheck>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("%s %-24s %s  margin %.3e  %s\n", c.passed ? "PASS" : "FAIL", (label + c.name).c_str(),
                c.passed ? "" : "<--", c.margin, c.detail.c_str());
    ok = ok && c.passed;
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of linear parabolic PDEs: reduced CG, all-at-once MINRES, spectra"};
  app.require_subcommand(1);

  Source src;
  std::string csv, json;

  auto* solve = app.add_subcommand("solve", "run one configuration");
  add_source(solve, src);
  solve->add_option("--csv", csv, "write the run record as CSV");
  solve->add_option("--json", json, "write the run record as JSON");

  auto* sweep = app.add_subcommand("sweep", "run every point of the sweep section");
  add_source(sweep, src);
  sweep->add_option("--csv", csv, "CSV report path");
  sweep->add_option("--json", json, "JSON report path");

  bool saddle = false;
  int dense_limit = pocp::kDenseLimit;
  auto* eig = app.add_subcommand("eig", "spectrum of the reduced operator or preconditioned saddle system");
  add_source(eig, src);
  eig->add_flag("--saddle", saddle, "preconditioned saddle spectrum (exact W) instead of the reduced one");
  eig->add_option("--dense-limit", dense_limit, "largest m (or 3m) for dense eigensolves");
  eig->add_option("--csv", csv, "eigenvalue CSV (index,value,cluster)");
  eig->add_option("--json", json, "spectrum report JSON");

  bool reduced_only = false;
  auto* verify = app.add_subcommand("verify", "check the eigenvalue inclusion and multiplicity claims");
  add_source(verify, src);
  verify->add_flag("--reduced-only", reduced_only, "skip the saddle-point checks");
  verify->add_option("--dense-limit", dense_limit, "largest m (or 3m) for dense eigensolves");
  verify->add_option("--json", json, "write the checks as JSON");

  std::string show;
  auto* list = app.add_subcommand("presets", "list built-in experiment presets");
  list->add_option("--show", show, "print the configuration of one preset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      if (!show.empty()) {
        std::cout << pocp::find_preset(show).config.dump(2) << '\n';
        return 0;
      }
      for (const auto& p : pocp::presets()) std::printf("%-22s %s\n", p.name.c_str(), p.description.c_str());
      return 0;
    }

    const pocp::ExperimentConfig cfg = load(src);

    if (*solve) {
      pocp::ExperimentConfig one = cfg;
      one.sweep.reset();
      const std::vector<pocp::RunRecord> recs{pocp::run_single(one)};
      print_record(recs.front());
      write_outputs(recs, cfg, csv, json);
      return 0;
    }

    if (*sweep) {
      std::printf("%s: %zu runs\n", cfg.name.c_str(), cfg.run_count());
      const auto recs = pocp::run_experiment(cfg, [](std::size_t, const pocp::RunRecord& r) { print_record(r); });
      write_outputs(recs, cfg, csv, json);
      return 0;
    }

    if (*eig) {
      const pocp::DiscreteProblem dp = pocp::build_discrete_problem(cfg);
      const pocp::ReducedOperator op = pocp::make_reduced_operator(dp);
      pocp::SpectrumReport rep;
      if (saddle) {
        const pocp::SaddleSystem sys(dp.system, dp.lambda(), cfg.solver.variant);
        const pocp::SaddlePreconditioner P(sys, pocp::WMode::ExactW, dense_limit);
        rep = pocp::precond_saddle_spectrum(sys, P, dense_limit);
      } else if (dp.system->m() <= dense_limit) {
        rep = pocp::dense_reduced_spectrum(op, dense_limit);
      } else {
        const auto r = pocp::lanczos_max_eig(op, cfg.solver.eig_tol);
        std::printf("max eigenvalue %.12g (%d Lanczos steps, residual %.2e)\n", r.value, r.iterations, r.residual);
        return 0;
      }
      print_clusters(rep);
      write_spectrum(rep, csv, json);
      return 0;
    }

    if (*verify) {
      const auto checks = pocp::verify_claims(cfg, !reduced_only, dense_limit);
      const bool ok = print_checks("", checks);
      if (!json.empty()) {
        pocp::Json arr = pocp::Json::array();
        for (const auto& c : checks) arr.push_back(pocp::to_json(c));
        std::ofstream out(json);
        if (!out) throw pocp::Error(pocp::ErrorKind::IoError, "cannot write '" + json + "'", json);
        out << arr.dump(2) << '\n';
      }
      return ok ? 0 : 2;
    }
    return 0;
  } catch (const pocp::Error& e) {
    std::fprintf(stderr, "pocp: %s: %s\n", std::string(pocp::to_string(e.kind())).c_str(), e.what());
    return 1;
  }
}
