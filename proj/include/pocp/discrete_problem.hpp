#pragma once

#include <memory>

#include <Eigen/Core>

#include "pocp/fem.hpp"
#include "pocp/problem.hpp"
#include "pocp/timeblock.hpp"

namespace pocp {

/// A validated problem bound to a spatial discretization and time grid:
/// the block system plus the assembled data loads.
struct DiscreteProblem {
  ValidatedProblem problem;
  std::shared_ptr<const SpatialDiscretization> disc;
  std::shared_ptr<const BlockSystem> system;

  Eigen::VectorXd y0_load;        // (y0, phi_k)_k
  Eigen::VectorXd y_omega_load;   // (phi_l, y_Omega)_l, end-time target only
  Eigen::VectorXd y_omega;        // M^{-1} y_omega_load
  BlockVector y_q;                // tracking target coefficients at t_1..t_N

  double lambda() const { return problem.spec().lambda; }
  bool tracking() const { return problem.is_tracking(); }
};

/// Assembles the block system (constant alpha, c) and all loads. Tracking
/// data is sampled at the right end point t_n of each interval.
DiscreteProblem discretize(const ValidatedProblem& problem,
                           std::shared_ptr<const SpatialDiscretization> disc, const TimeGrid& grid);

}  // namespace pocp
