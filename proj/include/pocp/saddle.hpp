#pragma once

#include <memory>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "pocp/discrete_problem.hpp"
#include "pocp/krylov.hpp"
#include "pocp/reduced.hpp"
#include "pocp/timeblock.hpp"

namespace pocp {

/// Sym:  [ E(x)M    0       K^T D ] [ y ]
///       [ 0        l D Mcal  -Mcal D ] [ u ]
///       [ D K     -D Mcal    0     ] [-p ]
///
/// Disc: same with K^T, -Mcal, K, -Mcal in the coupling blocks and the
/// multiplier zeta = D p in the third slot.
enum class SaddleVariant { Sym, Disc };
enum class WMode { ExactW, ApproxW };

std::string_view to_string(SaddleVariant v);
std::string_view to_string(WMode w);

/// Dense blocks in the generic saddle layout
///   [A1 0 B1^T; 0 lambda A2 B2^T; B1 B2 0].
struct SaddleRoles {
  Eigen::MatrixXd A1, A2, B1, B2;
};

class SaddleSystem {
 public:
  SaddleSystem(std::shared_ptr<const BlockSystem> system, double lambda, SaddleVariant variant);

  const BlockSystem& system() const noexcept { return *system_; }
  double lambda() const noexcept { return lambda_; }
  SaddleVariant variant() const noexcept { return variant_; }
  int m() const noexcept { return system_->m(); }
  int size() const noexcept { return 3 * m(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  /// Splits a 3m vector into (y, u, p), undoing the sign of the third slot
  /// and, for Disc, p = D^{-1} zeta.
  void unpack(const Eigen::VectorXd& x, BlockVector& y, BlockVector& u, BlockVector& p) const;
  Eigen::VectorXd pack(const BlockVector& y, const BlockVector& u, const BlockVector& p) const;

  /// Norm of a residual in which its three blocks are the L2(Q) residuals
  /// of the adjoint equation, the gradient equation and the state equation:
  /// sqrt(r^T (D Mcal)^{-1} r) blockwise, with D Mcal^{-1} on the state row
  /// for Disc.
  double natural_norm(const Eigen::VectorXd& r) const;

  SaddleRoles dense_roles() const;
  Eigen::MatrixXd dense() const;

 private:
  std::shared_ptr<const BlockSystem> system_;
  double lambda_;
  SaddleVariant variant_;
};

SaddleSystem assemble_saddle(std::shared_ptr<const BlockSystem> system, double lambda,
                             SaddleVariant variant);

/// Sym: (0..0, yomega_load | 0 | y0_load, 0..0).
/// Disc: same with y0_load / tau_1 in the third block.
Eigen::VectorXd saddle_rhs(const SaddleSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& y0_load,
                           const Eigen::Ref<const Eigen::VectorXd>& yomega_load);

/// Block triangular preconditioner P = U L with
///
///   U = [I  -K^T Mcal^{-1}/(1+l)  0; 0 I 0; 0 0 I]
///   L = [W 0 0; -D K  (1+l) D Mcal  0; 0 0 S3]
///
/// where W = E(x)M + l/(1+l) K^T D Mcal^{-1} K (ExactW, dense Cholesky,
/// small instances only) or Wbar = l/(1+l) K^T D Mcal^{-1} K (ApproxW,
/// inverted with one backward and one forward sweep). S3 = D Mcal for Sym
/// and D^{-1} Mcal for Disc.
class SaddlePreconditioner {
 public:
  static constexpr int kDefaultDenseLimit = 4000;

  SaddlePreconditioner(const SaddleSystem& sys, WMode mode, int dense_limit = kDefaultDenseLimit);

  WMode mode() const noexcept { return mode_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& r) const;
  /// Dense P, built by applying it to unit vectors.
  Eigen::MatrixXd dense() const;

 private:
  Eigen::VectorXd apply_W(const BlockVector& x) const;
  BlockVector solve_W(const BlockVector& r) const;

  const SaddleSystem* sys_;
  WMode mode_;
  Eigen::LLT<Eigen::MatrixXd> w_factor_;
};

Eigen::VectorXd apply_precond_inverse(const SaddlePreconditioner& P, const Eigen::VectorXd& r);

struct SaddleSolve {
  Eigen::VectorXd x;
  BlockVector y, u, p;
  KrylovReport report;
  /// ||rhs - T x|| / ||rhs|| in the Euclidean norm.
  double true_residual = 0.0;
  /// sqrt(r^T P^{-1} r) / sqrt(rhs^T P^{-1} rhs) for the true residual r.
  double precond_true_residual = 0.0;
  /// natural_norm(r) / natural_norm(rhs).
  double natural_residual = 0.0;
};

/// Reduction asked of each MINRES refinement cycle.
inline constexpr double kRefineReduction = 1e-6;

/// Preconditioned MINRES on the true residual, restarted until
/// r = rhs - T x is below tol relative to rhs both in the preconditioned
/// norm sqrt(r^T P^{-1} r) and in natural_norm. The first cycle aims at tol,
/// later ones reduce their own residual by max(tol, kRefineReduction).
/// The recursively updated MINRES residual drifts from the true one with
/// approximate W, and the P^{-1} norm underweights rough adjoint residuals
/// at small lambda. `max_iters` bounds the total over all cycles; the
/// history ends each cycle with the true preconditioned residual.
SaddleSolve minres_solve(const SaddleSystem& sys, const SaddlePreconditioner& P,
                         const Eigen::VectorXd& rhs, double tol = 1e-8, int max_iters = 1000,
                         int stagnation_window = 50, int max_cycles = 8);

struct AllAtOnceSolution {
  ControlSolution solution;
  double true_residual = 0.0;
  double precond_true_residual = 0.0;
  double natural_residual = 0.0;
};

/// End-time problems only.
AllAtOnceSolution solve_all_at_once(const DiscreteProblem& dp, WMode mode = WMode::ApproxW,
                                    SaddleVariant variant = SaddleVariant::Sym, double tol = 1e-8,
                                    int max_iters = 1000);

}  // namespace pocp
