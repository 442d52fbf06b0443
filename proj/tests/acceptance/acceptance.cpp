// Acceptance checks. `pocp_acceptance <n>` runs criterion n (1-9), no
// argument runs all of them. One PASS/FAIL line per criterion; the exit code
// is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracle/dense_oracle.hpp"
#include "../oracle/generic_instance.hpp"
#include "pocp/error.hpp"
#include "pocp/experiment.hpp"
#include "pocp/spectra.hpp"

using namespace pocp;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const SpatialDiscretization> interval(int n_elems) {
  auto mesh = std::make_shared<const SpatialMesh>(build_interval_mesh(n_elems));
  return std::make_shared<const SpatialDiscretization>(make_discretization(mesh));
}

DiscreteProblem instance(int n_nodes, int N, double lambda, double alpha, double c, bool cos_data) {
  ProblemSpec ps;
  ps.lambda = lambda;
  ps.alpha = alpha;
  ps.c = c;
  if (cos_data) ps.y0 = DataFunction::cos_product(1.0);
  ps.target = EndTimeTarget{cos_data ? DataFunction::cos_product(2.0) : DataFunction::zero()};
  return discretize(validate(ps), interval(n_nodes - 1), build_time_grid(1.0, N));
}

std::vector<RunRecord> run_preset(const std::string& name) {
  return run_experiment(parse_config_json(find_preset(name).config));
}

double dm_norm(const BlockSystem& sys, const BlockVector& v) { return std::sqrt(sys.inner_DM(v, v)); }

Eigen::MatrixXd dense_reduced(const ReducedOperator& op) {
  const int m = op.system().m(), nx = op.system().nx(), N = op.system().steps();
  Eigen::MatrixXd F(m, m);
  for (int j = 0; j < m; ++j) {
    BlockVector e(nx, N);
    e.flat()(j) = 1.0;
    F.col(j) = op.apply(e).flat();
  }
  return F;
}

// 1. Largest eigenvalues for c in {100, 10, 1, -1}.
Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto recs = run_preset("c-eig-sweep");
  const double elapsed = seconds_since(t0);
  const std::vector<double> cs = {100, 10, 1, -1};
  const std::vector<double> ref = {1.00476, 1.04975, 1.43204, 4.24815};
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const RunRecord& r = recs.at(i);
    const double got = r.max_eig.value_or(NAN);
    const double err = std::abs(got - ref[i]) / ref[i];
    std::ostringstream s;
    s << "c=" << cs[i] << " max_eig " << fmt("%.9g", got) << " ref " << ref[i] << " rel " << fmt("%.2e", err)
      << " (closed form at N=1000: " << fmt("%.9g", oracle::scalar_mode_max_eig(1.0, cs[i], 1.0, 1000)) << ")";
    o.require(r.status == "ok" && err <= 0.01, s.str());
  }
  o.require(elapsed <= 60.0, "runtime " + fmt("%.2f s", elapsed) + " <= 60 s");
  return o;
}

// 2. Mesh and alpha independence of the largest eigenvalue.
Outcome criterion2() {
  Outcome o;
  std::vector<double> h_vals;
  for (int nx : {16, 32, 64, 128}) {
    h_vals.push_back(max_eig_reduced(make_reduced_operator(instance(nx, 500, 1.0, 1.0, 1.0, false))));
  }
  const auto [hmin, hmax] = std::minmax_element(h_vals.begin(), h_vals.end());
  o.require(*hmax - *hmin <= 1e-8, "n_x in {16,32,64,128}: spread " + fmt("%.3e", *hmax - *hmin) + " <= 1e-8 (max_eig " +
                                       fmt("%.12g", *hmax) + ")");

  std::vector<double> a_vals;
  for (double alpha : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    a_vals.push_back(max_eig_reduced(make_reduced_operator(instance(64, 500, 1.0, alpha, 1.0, false))));
  }
  const auto [amin, amax] = std::minmax_element(a_vals.begin(), a_vals.end());
  o.require(*amax - *amin <= 1e-6, "alpha in {0,0.1,1,10,100}: spread " + fmt("%.3e", *amax - *amin) + " <= 1e-6");
  return o;
}

// 3. Dense reduced spectrum inside [lambda, lambda + gamma].
Outcome criterion3() {
  Outcome o;
  const int nx = 10, N = 8;
  const DiscreteProblem dp = instance(nx, N, 1.0, 1.0, 1.0, false);
  const double gamma = gamma_bound(1.0, 1.0);
  o.require(std::abs(gamma - 1.0) < 1e-15, "gamma_bound(1, 1) = " + fmt("%.17g", gamma));
  const SpectrumReport rep = dense_reduced_spectrum(make_reduced_operator(dp));
  for (const ClaimCheck& c : verify_spectral_claims(rep, 1.0, gamma, nx, nx * N)) {
    o.require(c.passed, c.name + " margin " + fmt("%.3e", c.margin) + " (" + c.detail + ")");
  }
  const int above = rep.count_above(1.0 + 1e-8);
  o.require(above <= nx, "eigenvalues above lambda + 1e-8: " + std::to_string(above) + " <= " + std::to_string(nx));
  return o;
}

// 4. Preconditioned saddle spectra, both variants.
Outcome criterion4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const int nx = 5, N = 4, m = nx * N;
  const DiscreteProblem dp = instance(nx, N, 1.0, 1.0, 1.0, false);
  for (SaddleVariant v : {SaddleVariant::Sym, SaddleVariant::Disc}) {
    const SaddleSystem sys(dp.system, 1.0, v);
    const SpectrumReport rep = precond_saddle_spectrum(sys, SaddlePreconditioner(sys, WMode::ExactW));
    for (const ClaimCheck& c : verify_spectral_claims(rep, 1.0, 0.0, nx, m)) {
      o.require(c.passed, std::string(to_string(v)) + "." + c.name + " (" + c.detail + ")");
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed <= 10.0, "runtime " + fmt("%.2f s", elapsed) + " <= 10 s");
  return o;
}

std::pair<int, int> iteration_range(const std::vector<RunRecord>& recs) {
  int lo = recs.front().iterations, hi = lo;
  for (const auto& r : recs) {
    lo = std::min(lo, r.iterations);
    hi = std::max(hi, r.iterations);
  }
  return {lo, hi};
}

std::string iteration_list(const std::vector<RunRecord>& recs) {
  std::string s;
  for (const auto& r : recs) {
    if (!s.empty()) s += ", ";
    s += "N=" + fmt("%g", r.sweep_value.value_or(0)) + ":" + std::to_string(r.iterations);
  }
  return s;
}

// 5. Weighted CG iteration band over N.
Outcome criterion5() {
  Outcome o;
  const auto recs = run_preset("N-cg-sweep");
  for (const auto& r : recs) o.require(r.status == "ok", "N=" + fmt("%g", *r.sweep_value) + " converged to 1e-10");
  const auto [lo, hi] = iteration_range(recs);
  o.require(hi - lo <= 5, "iterations " + iteration_list(recs) + ", band " + std::to_string(hi - lo) + " <= 5");
  return o;
}

// 6. MINRES with approximate W: iteration band and final residuals.
Outcome criterion6() {
  Outcome o;
  const auto recs = run_preset("N-minres-sweep");
  double worst = 0.0;
  for (const auto& r : recs) {
    o.require(r.status == "ok", "N=" + fmt("%g", *r.sweep_value) + " converged");
    worst = std::max({worst, r.residuals.gradient, r.residuals.state, r.residuals.adjoint});
  }
  const auto [lo, hi] = iteration_range(recs);
  o.require(hi - lo <= 10, "iterations " + iteration_list(recs) + ", band " + std::to_string(hi - lo) + " <= 10");
  o.require(worst <= 1e-8, "largest of gradient/state/adjoint residuals " + fmt("%.3e", worst) + " <= 1e-8");
  return o;
}

// 7. Dense oracle, cross-method and finite-difference consistency.
Outcome criterion7() {
  Outcome o;
  {
    const int nx = 4, N = 3;
    const double lambda = 0.7;
    const DiscreteProblem dp = instance(nx, N, lambda, 1.0, 1.0, false);
    const Eigen::MatrixXd M = oracle::mass_1d(nx - 1);
    const oracle::Blocks b = oracle::blocks(M, oracle::laplace_1d(nx - 1) + M, std::vector<double>(N, 1.0 / N));
    const Eigen::MatrixXd ref = oracle::reduced_matrix(b, lambda);
    const Eigen::MatrixXd got = dense_reduced(make_reduced_operator(dp));
    const double rel = (got - ref).norm() / ref.norm();
    o.require(rel <= 1e-12, "matrix-free F vs dense assembly: rel " + fmt("%.2e", rel) + " <= 1e-12");
  }
  {
    const DiscreteProblem dp = instance(16, 20, 1e-2, 1.0, -1.0, true);
    const ControlSolution red = solve_reduced(dp);
    const AllAtOnceSolution aao = solve_all_at_once(dp);
    const double rel = dm_norm(*dp.system, red.u - aao.solution.u) / dm_norm(*dp.system, red.u);
    o.require(rel <= 1e-6, "reduced vs all-at-once control: rel DM " + fmt("%.2e", rel) + " <= 1e-6");
  }
  {
    const DiscreteProblem dp = instance(8, 6, 0.1, 1.0, 0.5, true);
    std::mt19937_64 gen(2024);
    const Eigen::MatrixXd uu = oracle::random_matrix(8, 6, gen), vv = oracle::random_matrix(8, 6, gen);
    const BlockVector u(uu), v(vv);
    const double eps = 1e-5;
    const BlockVector up = u + eps * v, um = u - eps * v;
    const double fd =
        (evaluate_objective(dp, up, state_for(dp, up)) - evaluate_objective(dp, um, state_for(dp, um))) / (2 * eps);
    const double an = dp.system->inner_DM(reduced_gradient(dp, u), v);
    const double rel = std::abs(fd - an) / std::abs(an);
    o.require(rel <= 1e-6, "gradient vs central differences: rel " + fmt("%.2e", rel) + " <= 1e-6");
  }
  return o;
}

// 8. Integrator closed form.
Outcome criterion8() {
  Outcome o;
  const int nx = 8, N = 10, m = nx * N;
  const double lambda = 1.0, T = 1.0;
  const DiscreteProblem dp = instance(nx, N, lambda, 0.0, 0.0, true);
  const SpectrumReport rep = dense_reduced_spectrum(make_reduced_operator(dp));
  const int at_lambda = rep.count_near(lambda), at_top = rep.count_near(lambda + T);
  o.require(at_lambda == m - nx && at_top == nx && rep.clusters.size() == 2,
            "spectrum {lambda: " + std::to_string(at_lambda) + ", lambda+T: " + std::to_string(at_top) +
                "}, expected {" + std::to_string(m - nx) + ", " + std::to_string(nx) + "}");
  const ControlSolution s = solve_reduced(dp, 1e-12);
  o.require(s.report.converged && s.report.iterations <= 2,
            "weighted CG iterations " + std::to_string(s.report.iterations) + " <= 2");
  return o;
}

// 9. Random generic instances.
Outcome criterion9() {
  Outcome o;
  std::mt19937_64 gen(20240917);
  std::uniform_int_distribution<int> size(1, 12);
  const double lambdas[] = {0.1, 1.0, 10.0};
  int failed_instances = 0, at_endpoint = 0;
  std::string first_failure;
  for (int k = 0; k < 20; ++k) {
    const int n = size(gen), m = size(gen);
    const int r = std::uniform_int_distribution<int>(0, std::min(n, m))(gen);
    const double lambda = lambdas[k % 3];
    const SaddleRoles roles = oracle::generic_instance(n, m, r, gen);
    const SpectrumReport rep = generic_saddle_spectrum(roles, lambda);
    bool ok = true;
    for (const ClaimCheck& c : verify_saddle_multiplicities(rep, lambda, n + m, r, m - r)) {
      if (c.passed) continue;
      ok = false;
      if (first_failure.empty()) {
        first_failure = "instance " + std::to_string(k) + " n=" + std::to_string(n) + " m=" + std::to_string(m) +
                        " r=" + std::to_string(r) + " lambda=" + fmt("%g", lambda) + ": " + c.name + " margin " +
                        fmt("%.2e", c.margin);
      }
    }
    if (ok) continue;
    ++failed_instances;
    // Diagnose failures with m - n eigenvalues sitting on -1/(1+lambda).
    const double endpoint = -1.0 / (1.0 + lambda);
    const auto on_end = std::count_if(rep.eigenvalues.begin(), rep.eigenvalues.end(),
                                      [&](double e) { return std::abs(e - endpoint) <= 1e-8; });
    if (n < m && on_end == m - n) ++at_endpoint;
  }
  std::string detail = "20 instances, " + std::to_string(failed_instances) + " failed";
  if (failed_instances > 0) {
    detail += " (" + first_failure + "; " + std::to_string(at_endpoint) +
              " of the failures have n < m with exactly m - n eigenvalues at -1/(1+lambda))";
  }
  o.require(failed_instances == 0, detail);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9};
  std::vector<int> selected;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 9) {
      std::fprintf(stderr, "usage: %s [1-9]\n", argv[0]);
      return 2;
    }
    selected.push_back(n);
  } else {
    for (int n = 1; n <= 9; ++n) selected.push_back(n);
  }

  bool all = true;
  for (int n : selected) {
    Outcome out;
    try {
      out = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      out.passed = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d: %s\n", out.passed ? "PASS" : "FAIL", n, out.detail.c_str());
    std::fflush(stdout);
    all = all && out.passed;
  }
  return all ? 0 : 1;
}
