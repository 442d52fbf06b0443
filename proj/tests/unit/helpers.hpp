#pragma once

#include <memory>
#include <random>

#include <Eigen/Core>

#include "pocp/discrete_problem.hpp"
#include "pocp/mesh.hpp"
#include "pocp/timeblock.hpp"

namespace testutil {

inline std::shared_ptr<const pocp::SpatialDiscretization> interval(int n_elems) {
  auto mesh = std::make_shared<const pocp::SpatialMesh>(pocp::build_interval_mesh(n_elems));
  return std::make_shared<const pocp::SpatialDiscretization>(pocp::make_discretization(mesh));
}

inline std::shared_ptr<const pocp::BlockSystem> block_system(int n_elems, int N, double alpha, double c,
                                                             double T = 1.0) {
  return std::make_shared<const pocp::BlockSystem>(
      pocp::assemble_block_system(interval(n_elems), pocp::build_time_grid(T, N), alpha, c));
}

inline Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(gen);
  return v;
}

inline pocp::BlockVector random_block(int nx, int steps, unsigned seed) {
  pocp::BlockVector b(nx, steps);
  b.flat() = random_vector(b.size(), seed);
  return b;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline pocp::DiscreteProblem problem(int n_elems, int N, double lambda, double alpha, double c,
                                     std::optional<pocp::DataFunction> y0 = std::nullopt,
                                     std::optional<pocp::DataFunction> y_omega = std::nullopt,
                                     double T = 1.0) {
  pocp::ProblemSpec ps;
  ps.T = T;
  ps.lambda = lambda;
  ps.alpha = alpha;
  ps.c = c;
  ps.y0 = y0;
  ps.target = pocp::EndTimeTarget{y_omega.value_or(pocp::DataFunction::zero())};
  return pocp::discretize(pocp::validate(ps), interval(n_elems), pocp::build_time_grid(T, N));
}

}  // namespace testutil
