#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pocp/reduced.hpp"
#include "pocp/saddle.hpp"

namespace pocp {

enum class SpectrumKind { Reduced, Saddle, Generic };
std::string_view to_string(SpectrumKind k);

struct Cluster {
  double value = 0.0;
  int multiplicity = 0;
  double tolerance = 0.0;
};

struct ClaimCheck {
  std::string name;
  bool passed = false;
  double margin = 0.0;
  std::string detail;
};

struct SpectrumReport {
  SpectrumKind kind = SpectrumKind::Reduced;
  std::vector<double> eigenvalues;  // ascending
  std::vector<Cluster> clusters;
  double cluster_tol = 1e-8;
  std::vector<ClaimCheck> claim_checks;

  int count_near(double value) const;
  int count_above(double value) const;
};

inline constexpr double kClusterTol = 1e-8;
inline constexpr double kIntervalMargin = 1e-10;
inline constexpr int kDenseLimit = 4000;

/// Groups ascending eigenvalues whose consecutive gaps are <= tol.
std::vector<Cluster> cluster_eigenvalues(const std::vector<double>& sorted, double tol = kClusterTol);

/// Solves R x = eta (D Mcal) x with R = D Mcal F assembled column by column
/// from the matrix-free operator. Requires m <= dense_limit.
SpectrumReport dense_reduced_spectrum(const ReducedOperator& op, int dense_limit = kDenseLimit,
                                      double cluster_tol = kClusterTol);

struct LanczosResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Largest eigenvalue of F by Lanczos with full reorthogonalization in the
/// (.,.)_{D Mcal} product, from a fixed pseudo-random start. Converged when
/// the Ritz residual is <= tol * |theta|; throws NoConvergence otherwise.
LanczosResult lanczos_max_eig(const ReducedOperator& op, double tol = 1e-12, int max_iters = 200);
double max_eig_reduced(const ReducedOperator& op, double tol = 1e-12);

/// Solves T x = theta P x for the ExactW preconditioner (P is SPD).
/// The full 3m system must fit in dense_limit.
SpectrumReport precond_saddle_spectrum(const SaddleSystem& sys, const SaddlePreconditioner& P,
                                       int dense_limit = kDenseLimit, double cluster_tol = kClusterTol);

/// Generic block system [A1 0 B1^T; 0 l A2 B2^T; B1 B2 0] with its
/// preconditioner [A1+G, B1^T B2^{-T} A2, 0; A2 B2^{-1} B1, (1+l) A2, 0;
/// 0, 0, B2 A2^{-1} B2^T], G = B1^T B2^{-T} A2 B2^{-1} B1.
Eigen::MatrixXd generic_saddle_matrix(const SaddleRoles& roles, double lambda);
Eigen::MatrixXd generic_saddle_preconditioner(const SaddleRoles& roles, double lambda);
SpectrumReport generic_saddle_spectrum(const SaddleRoles& roles, double lambda,
                                       double cluster_tol = kClusterTol);

/// Reduced reports: (a) eigenvalues in [lambda, lambda + gamma] up to the
/// cluster tolerance, (b) at most n_x eigenvalues above lambda + tol.
/// Saddle reports: multiplicity 2m at 1, m - n_x at -1, the remaining n_x
/// strictly inside (-1, -1/(1+lambda)).
std::vector<ClaimCheck> verify_spectral_claims(const SpectrumReport& report, double lambda, double gamma,
                                               int n_x, int m);

/// Multiplicity and interval checks for any preconditioned saddle spectrum.
std::vector<ClaimCheck> verify_saddle_multiplicities(const SpectrumReport& report, double lambda,
                                                     int expected_plus_one, int expected_minus_one,
                                                     int expected_interior);

/// CSV with columns index,value,cluster (cluster = index into clusters).
void write_eigenvalues_csv(std::ostream& out, const SpectrumReport& report);

}  // namespace pocp
