#include "pocp/reduced.hpp"

#include <cmath>
#include <limits>

#include "pocp/error.hpp"

namespace pocp {

namespace {
constexpr double kCancellationTol = 64 * std::numeric_limits<double>::epsilon();
}  // namespace

ReducedOperator::ReducedOperator(std::shared_ptr<const BlockSystem> system, double lambda,
                                 Observation observation)
    : system_(std::move(system)), lambda_(lambda), observation_(observation) {
  if (!system_) throw Error(ErrorKind::InvalidValue, "null block system");
  if (!(lambda_ > 0.0)) throw Error(ErrorKind::NonPositive, "lambda must be positive", "lambda");
}

BlockVector ReducedOperator::apply(const BlockVector& u, BlockVector* mass_u) const {
  BlockVector mu = system_->apply_mass(u);
  const BlockVector y = system_->solve_K(mu);
  BlockVector p;
  if (observation_ == Observation::EndTime) {
    p = system_->solve_backward(y.block(y.steps() - 1));
  } else {
    const BlockVector source = system_->apply_mass(y);
    p = system_->solve_backward(Eigen::VectorXd::Zero(system_->nx()), &source);
  }
  p.values() += lambda_ * u.values();
  if (mass_u) *mass_u = std::move(mu);
  return p;
}

double ReducedOperator::norm(const BlockVector& a) const { return std::sqrt(inner(a, a)); }

BlockVector apply_reduced(const ReducedOperator& op, const BlockVector& u) { return op.apply(u); }

BlockVector build_reduced_rhs(const ReducedOperator& op, const Eigen::Ref<const Eigen::VectorXd>& y0_load,
                              const Eigen::Ref<const Eigen::VectorXd>& yomega_load) {
  const BlockSystem& sys = op.system();
  const BlockVector y = sys.solve_forward(sys.zeros(), y0_load);
  const Eigen::VectorXd y_end = y.block(y.steps() - 1);
  Eigen::VectorXd terminal = y_end - sys.mass().solve(yomega_load);
  // A mismatch at rounding level is a target that matches exactly.
  if (terminal.norm() <= kCancellationTol * y_end.norm()) terminal.setZero();
  BlockVector p = sys.solve_backward(terminal);
  p *= -1.0;
  return p;
}

BlockVector build_reduced_rhs_tracking(const ReducedOperator& op,
                                       const Eigen::Ref<const Eigen::VectorXd>& y0_load,
                                       const BlockVector& y_q) {
  const BlockSystem& sys = op.system();
  const BlockVector y = sys.solve_forward(sys.zeros(), y0_load);
  const BlockVector source = sys.apply_mass(y - y_q);
  BlockVector p = sys.solve_backward(Eigen::VectorXd::Zero(sys.nx()), &source);
  p *= -1.0;
  return p;
}

CgResult weighted_cg(const ReducedOperator& op, const BlockVector& rhs, double tol, int max_iters,
                     int stagnation_window) {
  const BlockSystem& sys = op.system();
  CgResult out{sys.zeros(), {}};
  KrylovReport& rep = out.report;

  BlockVector r = rhs;
  double rr = sys.inner_DM(r, r);
  const double rhs_norm = std::sqrt(rr);
  rep.residual_history.push_back(rhs_norm);
  rep.threshold = tol * rhs_norm;
  if (rhs_norm == 0.0) {
    rep.converged = true;
    return out;
  }

  BlockVector p = r;
  BlockVector mass_p;
  BlockVector best = out.u;
  StagnationMonitor monitor(stagnation_window);
  monitor.update(rhs_norm);
  rep.termination = Termination::MaxIters;
  for (int k = 1; k <= max_iters; ++k) {
    const BlockVector q = op.apply(p, &mass_p);
    const double pq = sys.inner_D(q, mass_p);
    if (!(pq > 0.0)) {
      rep.termination = Termination::Breakdown;
      break;
    }
    const double step = rr / pq;
    out.u.values() += step * p.values();
    r.values() -= step * q.values();
    const double rr_new = sys.inner_DM(r, r);
    const double res = std::sqrt(rr_new);
    rep.iterations = k;
    rep.residual_history.push_back(res);
    if (monitor.update(res)) best = out.u;
    if (res <= rep.threshold) {
      rep.converged = true;
      rep.termination = Termination::Tolerance;
      return out;
    }
    if (monitor.stagnated()) {
      rep.termination = Termination::Stagnation;
      break;
    }
    p.values() = r.values() + (rr_new / rr) * p.values();
    rr = rr_new;
  }
  if (rep.termination != Termination::Breakdown) out.u = std::move(best);
  return out;
}

ReducedOperator make_reduced_operator(const DiscreteProblem& dp) {
  return ReducedOperator(dp.system, dp.lambda(),
                         dp.tracking() ? Observation::Tracking : Observation::EndTime);
}

BlockVector state_for(const DiscreteProblem& dp, const BlockVector& u) {
  return dp.system->solve_forward(u, dp.y0_load);
}

BlockVector adjoint_for(const DiscreteProblem& dp, const BlockVector& y) {
  const BlockSystem& sys = *dp.system;
  if (dp.tracking()) {
    const BlockVector source = sys.apply_mass(y - dp.y_q);
    return sys.solve_backward(Eigen::VectorXd::Zero(sys.nx()), &source);
  }
  return sys.solve_backward(y.block(y.steps() - 1) - dp.y_omega);
}

double evaluate_objective(const DiscreteProblem& dp, const BlockVector& u, const BlockVector& y) {
  const BlockSystem& sys = *dp.system;
  double misfit = 0.0;
  if (dp.tracking()) {
    const BlockVector diff = y - dp.y_q;
    misfit = sys.inner_DM(diff, diff);
  } else {
    const Eigen::VectorXd diff = y.block(y.steps() - 1) - dp.y_omega;
    misfit = diff.dot(sys.mass().multiply(diff));
  }
  return 0.5 * misfit + 0.5 * dp.lambda() * sys.inner_DM(u, u);
}

BlockVector reduced_gradient(const DiscreteProblem& dp, const BlockVector& u) {
  BlockVector g = adjoint_for(dp, state_for(dp, u));
  g.values() += dp.lambda() * u.values();
  return g;
}

namespace {

double dual_norm(const BlockSystem& sys, const BlockVector& r) {
  const BlockVector z = sys.solve_mass(r);
  double sum = 0.0;
  for (int n = 0; n < sys.steps(); ++n) sum += sys.grid().tau(n) * r.block(n).dot(z.block(n));
  return std::sqrt(std::max(sum, 0.0));
}

}  // namespace

KktResiduals kkt_residuals(const DiscreteProblem& dp, const BlockVector& y, const BlockVector& u,
                           const BlockVector& p) {
  const BlockSystem& sys = *dp.system;
  KktResiduals res;

  BlockVector rs = sys.apply_K(y) - sys.apply_mass(u);
  rs.block(0) -= dp.y0_load / sys.grid().tau(0);
  res.state = dual_norm(sys, rs);

  // (K^T D p)_j / tau_j = S_j p_j - M p_{j+1} / tau_j.
  BlockVector ra = sys.apply_Dinv(sys.apply_KT(sys.apply_D(p)));
  const int last = sys.steps() - 1;
  if (dp.tracking()) {
    ra -= sys.apply_mass(y - dp.y_q);
  } else {
    const Eigen::VectorXd terminal = y.block(last) - dp.y_omega;
    ra.block(last) -= sys.mass().multiply(terminal) / sys.grid().tau(last);
  }
  res.adjoint = dual_norm(sys, ra);

  BlockVector g = p;
  g.values() += dp.lambda() * u.values();
  res.gradient = std::sqrt(std::max(sys.inner_DM(g, g), 0.0));
  return res;
}

ControlSolution solve_reduced(const DiscreteProblem& dp, double tol, int max_iters) {
  const ReducedOperator op = make_reduced_operator(dp);
  const BlockVector rhs = dp.tracking() ? build_reduced_rhs_tracking(op, dp.y0_load, dp.y_q)
                                        : build_reduced_rhs(op, dp.y0_load, dp.y_omega_load);
  CgResult cg = weighted_cg(op, rhs, tol, max_iters);
  ControlSolution sol;
  sol.u = std::move(cg.u);
  sol.report = std::move(cg.report);
  sol.y = state_for(dp, sol.u);
  sol.p = adjoint_for(dp, sol.y);
  sol.objective = evaluate_objective(dp, sol.u, sol.y);
  sol.residuals = kkt_residuals(dp, sol.y, sol.u, sol.p);
  return sol;
}

ControlSolution solve_reduced(const ValidatedProblem& problem,
                              std::shared_ptr<const SpatialDiscretization> disc, const TimeGrid& grid,
                              double tol, int max_iters) {
  return solve_reduced(discretize(problem, std::move(disc), grid), tol, max_iters);
}

}  // namespace pocp
