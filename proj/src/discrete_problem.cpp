#include "pocp/discrete_problem.hpp"

#include <cmath>

#include "pocp/error.hpp"

namespace pocp {

DiscreteProblem discretize(const ValidatedProblem& problem,
                           std::shared_ptr<const SpatialDiscretization> disc, const TimeGrid& grid) {
  if (!disc) throw Error(ErrorKind::InvalidMesh, "null discretization");
  const auto& spec = problem.spec();
  if (disc->mesh->dim() != spec.dim) {
    throw Error(ErrorKind::InvalidValue, "mesh dimension does not match problem dim", "dim");
  }
  if (std::abs(grid.T() - spec.T) > 1e-12 * spec.T) {
    throw Error(ErrorKind::BadStepSum, "time grid horizon does not match T", "T");
  }
  DiscreteProblem dp{problem, disc,
                     std::make_shared<const BlockSystem>(
                         assemble_block_system(disc, grid, spec.alpha, spec.c)),
                     {}, {}, {}, {}};
  const SpatialMesh& mesh = *disc->mesh;
  dp.y0_load = assemble_load(mesh, problem.y0());
  if (const auto* end = std::get_if<EndTimeTarget>(&problem.target())) {
    dp.y_omega_load = assemble_load(mesh, end->y_omega);
    dp.y_omega = disc->mass.solve(dp.y_omega_load);
  } else {
    const auto& track = std::get<TrackingTarget>(problem.target());
    dp.y_q = dp.system->zeros();
    for (int n = 0; n < grid.steps(); ++n) {
      const auto t = std::make_optional(grid.times()[static_cast<std::size_t>(n) + 1]);
      const Eigen::VectorXd load =
          assemble_load(mesh, track.y_q, track.y_q.time_dependent() ? t : std::nullopt);
      dp.y_q.block(n) = disc->mass.solve(load);
    }
  }
  return dp;
}

}  // namespace pocp
