#include "pocp/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pocp/error.hpp"

namespace pocp {

std::string_view to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::Reduced: return "reduced";
    case SpectrumKind::Saddle: return "saddle";
    case SpectrumKind::Generic: return "generic";
  }
  return "unknown";
}

int SpectrumReport::count_near(double value) const {
  return static_cast<int>(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                                        [&](double e) { return std::abs(e - value) <= cluster_tol; }));
}

int SpectrumReport::count_above(double value) const {
  return static_cast<int>(
      std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](double e) { return e > value; }));
}

std::vector<Cluster> cluster_eigenvalues(const std::vector<double>& sorted, double tol) {
  std::vector<Cluster> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i == sorted.size() || sorted[i] - sorted[i - 1] > tol) {
      if (i > start) {
        double sum = 0.0;
        for (std::size_t k = start; k < i; ++k) sum += sorted[k];
        out.push_back({sum / static_cast<double>(i - start), static_cast<int>(i - start), tol});
      }
      start = i;
    }
  }
  return out;
}

namespace {

SpectrumReport generalized_spectrum(Eigen::MatrixXd a, Eigen::MatrixXd b, SpectrumKind kind,
                                    double cluster_tol) {
  a = 0.5 * (a + a.transpose()).eval();
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b,
                                                                   Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NoConvergence, "generalized symmetric eigensolver failed");
  }
  SpectrumReport rep;
  rep.kind = kind;
  rep.cluster_tol = cluster_tol;
  const Eigen::VectorXd ev = solver.eigenvalues();
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
  rep.clusters = cluster_eigenvalues(rep.eigenvalues, cluster_tol);
  return rep;
}

}  // namespace

SpectrumReport dense_reduced_spectrum(const ReducedOperator& op, int dense_limit, double cluster_tol) {
  const BlockSystem& sys = op.system();
  const int m = sys.m();
  if (m > dense_limit) {
    throw Error(ErrorKind::TooLargeForDense,
                "m = " + std::to_string(m) + " exceeds dense limit " + std::to_string(dense_limit));
  }
  Eigen::MatrixXd r(m, m);
  BlockVector e = sys.zeros();
  for (int j = 0; j < m; ++j) {
    e.flat()(j) = 1.0;
    r.col(j) = sys.apply_DM(op.apply(e)).flat();
    e.flat()(j) = 0.0;
  }
  const Eigen::MatrixXd b = sys.d_diagonal().asDiagonal() * sys.dense_mass();
  return generalized_spectrum(std::move(r), b, SpectrumKind::Reduced, cluster_tol);
}

LanczosResult lanczos_max_eig(const ReducedOperator& op, double tol, int max_iters) {
  const BlockSystem& sys = op.system();
  const int m = sys.m();
  max_iters = std::min(max_iters, m);

  std::mt19937_64 rng(20240531);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BlockVector v = sys.zeros();
  for (Eigen::Index i = 0; i < v.size(); ++i) v.flat()(i) = dist(rng);
  v *= 1.0 / std::sqrt(sys.inner_DM(v, v));

  // Basis vectors and their D Mcal images for cheap reorthogonalization.
  std::vector<Eigen::VectorXd> basis;
  std::vector<Eigen::VectorXd> basis_dm;
  std::vector<double> alphas;
  std::vector<double> betas;

  LanczosResult res;
  for (int k = 0; k < max_iters; ++k) {
    basis.emplace_back(v.flat());
    basis_dm.emplace_back(sys.apply_DM(v).flat());

    BlockVector w = op.apply(v);
    Eigen::Map<Eigen::VectorXd> wf = w.flat();
    // Two passes of classical Gram-Schmidt against every basis vector.
    double alpha = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < basis.size(); ++i) {
        const double h = basis_dm[i].dot(wf);
        wf -= h * basis[i];
        if (i + 1 == basis.size()) alpha += h;
      }
    }
    alphas.push_back(alpha);
    const double beta = std::sqrt(std::max(sys.inner_DM(w, w), 0.0));

    const int n = static_cast<int>(alphas.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alphas.data(), n);
    Eigen::VectorXd sub = n > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(betas.data(), n - 1))
                                : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta = tri.eigenvalues()(n - 1);
    const double ritz_res = beta * std::abs(tri.eigenvectors()(n - 1, n - 1));
    res = {theta, k + 1, ritz_res};

    if (ritz_res <= tol * std::abs(theta) || beta <= 1e-14 * std::abs(theta)) return res;
    betas.push_back(beta);
    v = std::move(w);
    v *= 1.0 / beta;
  }
  if (res.iterations == m) return res;  // full basis: Ritz values are exact
  throw Error(ErrorKind::NoConvergence, "Lanczos did not converge in " + std::to_string(max_iters) +
                                            " iterations (residual " + std::to_string(res.residual) + ")");
}

double max_eig_reduced(const ReducedOperator& op, double tol) { return lanczos_max_eig(op, tol).value; }

SpectrumReport precond_saddle_spectrum(const SaddleSystem& sys, const SaddlePreconditioner& P,
                                       int dense_limit, double cluster_tol) {
  if (P.mode() != WMode::ExactW) {
    throw Error(ErrorKind::NotExactW, "spectrum verification needs the exact-W preconditioner");
  }
  if (sys.size() > dense_limit) {
    throw Error(ErrorKind::TooLargeForDense, "3m = " + std::to_string(sys.size()) +
                                                 " exceeds dense limit " + std::to_string(dense_limit));
  }
  return generalized_spectrum(sys.dense(), P.dense(), SpectrumKind::Saddle, cluster_tol);
}

Eigen::MatrixXd generic_saddle_matrix(const SaddleRoles& r, double lambda) {
  const Eigen::Index n = r.A1.rows();
  const Eigen::Index m = r.A2.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 2 * m, n + 2 * m);
  a.block(0, 0, n, n) = r.A1;
  a.block(0, n + m, n, m) = r.B1.transpose();
  a.block(n, n, m, m) = lambda * r.A2;
  a.block(n, n + m, m, m) = r.B2.transpose();
  a.block(n + m, 0, m, n) = r.B1;
  a.block(n + m, n, m, m) = r.B2;
  return a;
}

Eigen::MatrixXd generic_saddle_preconditioner(const SaddleRoles& r, double lambda) {
  const Eigen::Index n = r.A1.rows();
  const Eigen::Index m = r.A2.rows();
  const Eigen::PartialPivLU<Eigen::MatrixXd> b2(r.B2);
  const Eigen::MatrixXd b2inv_b1 = b2.solve(r.B1);                       // B2^{-1} B1
  const Eigen::MatrixXd coupling = r.A2 * b2inv_b1;                      // A2 B2^{-1} B1
  const Eigen::MatrixXd g = b2inv_b1.transpose() * coupling;             // B1^T B2^{-T} A2 B2^{-1} B1
  const Eigen::MatrixXd s3 = r.B2 * r.A2.llt().solve(r.B2.transpose());  // B2 A2^{-1} B2^T
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n + 2 * m, n + 2 * m);
  p.block(0, 0, n, n) = r.A1 + g;
  p.block(0, n, n, m) = coupling.transpose();
  p.block(n, 0, m, n) = coupling;
  p.block(n, n, m, m) = (1.0 + lambda) * r.A2;
  p.block(n + m, n + m, m, m) = s3;
  return p;
}

SpectrumReport generic_saddle_spectrum(const SaddleRoles& roles, double lambda, double cluster_tol) {
  return generalized_spectrum(generic_saddle_matrix(roles, lambda),
                              generic_saddle_preconditioner(roles, lambda), SpectrumKind::Generic,
                              cluster_tol);
}

std::vector<ClaimCheck> verify_saddle_multiplicities(const SpectrumReport& report, double lambda,
                                                     int expected_plus_one, int expected_minus_one,
                                                     int expected_interior) {
  std::vector<ClaimCheck> checks;
  const int plus = report.count_near(1.0);
  const int minus = report.count_near(-1.0);
  checks.push_back({"multiplicity_plus_one", plus == expected_plus_one,
                    static_cast<double>(plus - expected_plus_one),
                    "found " + std::to_string(plus) + ", expected " + std::to_string(expected_plus_one)});
  checks.push_back({"multiplicity_minus_one", minus == expected_minus_one,
                    static_cast<double>(minus - expected_minus_one),
                    "found " + std::to_string(minus) + ", expected " + std::to_string(expected_minus_one)});

  const double lo = -1.0;
  const double hi = -1.0 / (1.0 + lambda);
  int interior = 0;
  double margin = std::numeric_limits<double>::infinity();
  for (double e : report.eigenvalues) {
    if (std::abs(e - 1.0) <= report.cluster_tol || std::abs(e + 1.0) <= report.cluster_tol) continue;
    ++interior;
    margin = std::min(margin, std::min(e - lo, hi - e));
  }
  if (interior == 0) margin = 0.0;
  const bool inside = interior == 0 || margin >= kIntervalMargin;
  checks.push_back({"interior_count", interior == expected_interior,
                    static_cast<double>(interior - expected_interior),
                    "found " + std::to_string(interior) + ", expected " + std::to_string(expected_interior)});
  checks.push_back({"interior_in_interval", inside, margin,
                    "remaining eigenvalues in (-1, " + std::to_string(hi) + ")"});
  return checks;
}

std::vector<ClaimCheck> verify_spectral_claims(const SpectrumReport& report, double lambda, double gamma,
                                               int n_x, int m) {
  if (report.kind != SpectrumKind::Reduced) {
    return verify_saddle_multiplicities(report, lambda, 2 * m, m - n_x, n_x);
  }
  std::vector<ClaimCheck> checks;
  const double tol = report.cluster_tol;
  if (report.eigenvalues.empty()) {
    checks.push_back({"eigenvalue_inclusion", false, 0.0, "empty spectrum"});
    return checks;
  }
  const double lo = report.eigenvalues.front();
  const double hi = report.eigenvalues.back();
  const double margin = std::min(lo - lambda, lambda + gamma - hi);
  checks.push_back({"eigenvalue_inclusion", margin >= -tol, margin,
                    "spectrum [" + std::to_string(lo) + ", " + std::to_string(hi) + "] within [" +
                        std::to_string(lambda) + ", " + std::to_string(lambda + gamma) + "]"});
  const int above = report.count_above(lambda + tol);
  checks.push_back({"count_above_lambda", above <= n_x, static_cast<double>(n_x - above),
                    std::to_string(above) + " eigenvalues above lambda, at most " + std::to_string(n_x)});
  return checks;
}

void write_eigenvalues_csv(std::ostream& out, const SpectrumReport& report) {
  out.precision(17);
  out << "index,value,cluster\n";
  std::size_t cluster = 0;
  int used = 0;
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i) {
    while (cluster < report.clusters.size() && used >= report.clusters[cluster].multiplicity) {
      ++cluster;
      used = 0;
    }
    out << i << ',' << report.eigenvalues[i] << ',' << cluster << '\n';
    ++used;
  }
}

}  // namespace pocp
