#pragma once

#include <memory>

#include <Eigen/Core>

#include "pocp/discrete_problem.hpp"
#include "pocp/krylov.hpp"
#include "pocp/timeblock.hpp"

namespace pocp {

enum class Observation { EndTime, Tracking };

/// Control-to-gradient map with the data parts removed:
///
///   end time:  F u = lambda u + D^{-1} K^{-T} (e_N e_N^T (x) M) K^{-1} Mcal u
///   tracking:  F u = lambda u + D^{-1} K^{-T} (D Mcal) K^{-1} Mcal u
///
/// Self-adjoint and positive definite in the (.,.)_{D Mcal} product.
/// Each application costs one forward and one backward sweep.
class ReducedOperator {
 public:
  ReducedOperator(std::shared_ptr<const BlockSystem> system, double lambda,
                  Observation observation = Observation::EndTime);

  const BlockSystem& system() const noexcept { return *system_; }
  std::shared_ptr<const BlockSystem> system_ptr() const noexcept { return system_; }
  double lambda() const noexcept { return lambda_; }
  Observation observation() const noexcept { return observation_; }

  /// F u. When `mass_u` is given it receives Mcal u, which the forward sweep
  /// needs anyway.
  BlockVector apply(const BlockVector& u, BlockVector* mass_u = nullptr) const;

  double inner(const BlockVector& a, const BlockVector& b) const { return system_->inner_DM(a, b); }
  double norm(const BlockVector& a) const;

 private:
  std::shared_ptr<const BlockSystem> system_;
  double lambda_;
  Observation observation_;
};

BlockVector apply_reduced(const ReducedOperator& op, const BlockVector& u);

/// -p(y_N(0, y0) - y_Omega), with y_Omega = M^{-1} yomega_load.
BlockVector build_reduced_rhs(const ReducedOperator& op, const Eigen::Ref<const Eigen::VectorXd>& y0_load,
                              const Eigen::Ref<const Eigen::VectorXd>& yomega_load);

/// Tracking variant: -p with adjoint source M (y_n(0, y0) - y_q,n).
BlockVector build_reduced_rhs_tracking(const ReducedOperator& op,
                                       const Eigen::Ref<const Eigen::VectorXd>& y0_load,
                                       const BlockVector& y_q);

struct CgResult {
  BlockVector u;
  KrylovReport report;
};

/// CG on F u = rhs with every inner product taken in (.,.)_{D Mcal}.
/// Starts from u = 0 and stops at ||F u - rhs||_{DM} <= tol ||rhs||_{DM}.
/// Mcal p from the operator's forward sweep is reused for (p, F p), so one
/// mass application per iteration is saved. On max_iters or stagnation the
/// best iterate is returned.
CgResult weighted_cg(const ReducedOperator& op, const BlockVector& rhs, double tol = 1e-10,
                     int max_iters = 1000, int stagnation_window = 50);

/// L2(Q)-type residuals of the optimality system. State and adjoint
/// residuals are measured in the discrete dual norm sqrt(sum tau r^T M^{-1} r).
struct KktResiduals {
  double state = 0.0;
  double adjoint = 0.0;
  double gradient = 0.0;

  friend bool operator==(const KktResiduals&, const KktResiduals&) = default;
};

struct ControlSolution {
  BlockVector u;
  BlockVector y;
  BlockVector p;
  double objective = 0.0;
  KrylovReport report;
  KktResiduals residuals;
};

/// Builds the reduced right-hand side, runs weighted CG, then recomputes y
/// and p from u with the full data.
ControlSolution solve_reduced(const DiscreteProblem& dp, double tol = 1e-10, int max_iters = 1000);
ControlSolution solve_reduced(const ValidatedProblem& problem,
                              std::shared_ptr<const SpatialDiscretization> disc, const TimeGrid& grid,
                              double tol = 1e-10, int max_iters = 1000);

ReducedOperator make_reduced_operator(const DiscreteProblem& dp);

/// State with the full initial data.
BlockVector state_for(const DiscreteProblem& dp, const BlockVector& u);
/// Adjoint with the full target data for a given state.
BlockVector adjoint_for(const DiscreteProblem& dp, const BlockVector& y);

/// End time: 1/2 ||y_N - y_Omega||_M^2 + lambda/2 sum tau_n ||u_n||_M^2.
/// Tracking: 1/2 sum tau_n ||y_n - y_q,n||_M^2 + the same control term.
double evaluate_objective(const DiscreteProblem& dp, const BlockVector& u, const BlockVector& y);

/// lambda u + p(u), the gradient in the (.,.)_{D Mcal} product.
BlockVector reduced_gradient(const DiscreteProblem& dp, const BlockVector& u);

KktResiduals kkt_residuals(const DiscreteProblem& dp, const BlockVector& y, const BlockVector& u,
                           const BlockVector& p);

}  // namespace pocp
