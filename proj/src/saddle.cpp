#include "pocp/saddle.hpp"

#include <cmath>
#include <limits>

#include "pocp/error.hpp"

namespace pocp {

std::string_view to_string(SaddleVariant v) { return v == SaddleVariant::Sym ? "sym" : "disc"; }
std::string_view to_string(WMode w) { return w == WMode::ExactW ? "exact" : "approx"; }

namespace {

struct Parts {
  BlockVector y, u, w;
};

Parts split(const BlockSystem& sys, const Eigen::VectorXd& x) {
  const Eigen::Index m = sys.m();
  if (x.size() != 3 * m) throw Error(ErrorKind::SizeMismatch, "saddle vector has wrong length");
  return {BlockVector::from_flat(x.segment(0, m), sys.nx()),
          BlockVector::from_flat(x.segment(m, m), sys.nx()),
          BlockVector::from_flat(x.segment(2 * m, m), sys.nx())};
}

Eigen::VectorXd join(const BlockVector& a, const BlockVector& b, const BlockVector& c) {
  const Eigen::Index m = a.size();
  Eigen::VectorXd out(3 * m);
  out << a.flat(), b.flat(), c.flat();
  return out;
}

}  // namespace

SaddleSystem::SaddleSystem(std::shared_ptr<const BlockSystem> system, double lambda,
                           SaddleVariant variant)
    : system_(std::move(system)), lambda_(lambda), variant_(variant) {
  if (!system_) throw Error(ErrorKind::InvalidValue, "null block system");
  if (!(lambda_ > 0.0)) throw Error(ErrorKind::NonPositive, "lambda must be positive", "lambda");
}

Eigen::VectorXd SaddleSystem::apply(const Eigen::VectorXd& x) const {
  const BlockSystem& sys = *system_;
  const Parts in = split(sys, x);
  const int last = sys.steps() - 1;
  const bool sym = variant_ == SaddleVariant::Sym;

  BlockVector out1 = sym ? sys.apply_KT(sys.apply_D(in.w)) : sys.apply_KT(in.w);
  out1.block(last) += sys.mass().multiply(in.y.block(last));

  BlockVector out2 = sys.apply_DM(in.u);
  out2 *= lambda_;
  out2 -= sym ? sys.apply_DM(in.w) : sys.apply_mass(in.w);

  BlockVector out3 = sys.apply_K(in.y) - sys.apply_mass(in.u);
  if (sym) out3 = sys.apply_D(out3);
  return join(out1, out2, out3);
}

void SaddleSystem::unpack(const Eigen::VectorXd& x, BlockVector& y, BlockVector& u, BlockVector& p) const {
  Parts parts = split(*system_, x);
  y = std::move(parts.y);
  u = std::move(parts.u);
  parts.w *= -1.0;
  p = variant_ == SaddleVariant::Sym ? std::move(parts.w) : system_->apply_Dinv(parts.w);
}

Eigen::VectorXd SaddleSystem::pack(const BlockVector& y, const BlockVector& u, const BlockVector& p) const {
  BlockVector w = variant_ == SaddleVariant::Sym ? p : system_->apply_D(p);
  w *= -1.0;
  return join(y, u, w);
}

double SaddleSystem::natural_norm(const Eigen::VectorXd& r) const {
  const BlockSystem& sys = *system_;
  const Parts parts = split(sys, r);
  double sum = 0.0;
  auto add = [&](const BlockVector& v, bool times_tau) {
    const BlockVector z = sys.solve_mass(v);
    for (int n = 0; n < sys.steps(); ++n) {
      const double t = sys.grid().tau(n);
      sum += v.block(n).dot(z.block(n)) * (times_tau ? t : 1.0 / t);
    }
  };
  add(parts.y, false);
  add(parts.u, false);
  add(parts.w, variant_ == SaddleVariant::Disc);
  return std::sqrt(std::max(sum, 0.0));
}

SaddleRoles SaddleSystem::dense_roles() const {
  const BlockSystem& sys = *system_;
  const int m = sys.m();
  const int nx = sys.nx();
  SaddleRoles roles;
  roles.A1 = Eigen::MatrixXd::Zero(m, m);
  roles.A1.bottomRightCorner(nx, nx) = sys.mass().dense();
  const Eigen::VectorXd d = sys.d_diagonal();
  const Eigen::MatrixXd mass = sys.dense_mass();
  roles.A2 = d.asDiagonal() * mass;
  const Eigen::MatrixXd k = sys.dense_K();
  if (variant_ == SaddleVariant::Sym) {
    roles.B1 = d.asDiagonal() * k;
    roles.B2 = -(d.asDiagonal() * mass);
  } else {
    roles.B1 = k;
    roles.B2 = -mass;
  }
  return roles;
}

Eigen::MatrixXd SaddleSystem::dense() const {
  const SaddleRoles r = dense_roles();
  const int m = system_->m();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(3 * m, 3 * m);
  t.block(0, 0, m, m) = r.A1;
  t.block(0, 2 * m, m, m) = r.B1.transpose();
  t.block(m, m, m, m) = lambda_ * r.A2;
  t.block(m, 2 * m, m, m) = r.B2.transpose();
  t.block(2 * m, 0, m, m) = r.B1;
  t.block(2 * m, m, m, m) = r.B2;
  return t;
}

SaddleSystem assemble_saddle(std::shared_ptr<const BlockSystem> system, double lambda,
                             SaddleVariant variant) {
  return SaddleSystem(std::move(system), lambda, variant);
}

Eigen::VectorXd saddle_rhs(const SaddleSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& y0_load,
                           const Eigen::Ref<const Eigen::VectorXd>& yomega_load) {
  const BlockSystem& bs = sys.system();
  if (y0_load.size() != bs.nx() || yomega_load.size() != bs.nx()) {
    throw Error(ErrorKind::SizeMismatch, "load vectors must have n_x entries");
  }
  BlockVector b1 = bs.zeros();
  BlockVector b3 = bs.zeros();
  b1.block(bs.steps() - 1) = yomega_load;
  b3.block(0) = y0_load;
  if (sys.variant() == SaddleVariant::Disc) b3.block(0) /= bs.grid().tau(0);
  return join(b1, bs.zeros(), b3);
}

SaddlePreconditioner::SaddlePreconditioner(const SaddleSystem& sys, WMode mode, int dense_limit)
    : sys_(&sys), mode_(mode) {
  const double weight = sys.lambda() / (1.0 + sys.lambda());
  if (mode_ == WMode::ApproxW) {
    if (weight < 100.0 * std::numeric_limits<double>::epsilon()) {
      throw Error(ErrorKind::SingularW, "lambda too small: Wbar is numerically singular", "lambda");
    }
    return;
  }
  const BlockSystem& bs = sys.system();
  if (bs.m() > dense_limit) {
    throw Error(ErrorKind::TooLargeForDense,
                "exact W needs a dense factorization; m = " + std::to_string(bs.m()) +
                    " exceeds the limit " + std::to_string(dense_limit));
  }
  const Eigen::MatrixXd k = bs.dense_K();
  Eigen::MatrixXd minv_k(bs.m(), bs.m());
  for (int n = 0; n < bs.steps(); ++n) {
    minv_k.middleRows(n * bs.nx(), bs.nx()) =
        bs.mass().factorization().solve_columns(Eigen::MatrixXd(k.middleRows(n * bs.nx(), bs.nx())));
  }
  Eigen::MatrixXd w = weight * (k.transpose() * bs.d_diagonal().asDiagonal() * minv_k);
  w = 0.5 * (w + w.transpose()).eval();
  w.bottomRightCorner(bs.nx(), bs.nx()) += bs.mass().dense();
  w_factor_.compute(w);
  if (w_factor_.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularW, "Cholesky factorization of W failed");
  }
}

Eigen::VectorXd SaddlePreconditioner::apply_W(const BlockVector& x) const {
  const BlockSystem& bs = sys_->system();
  const double weight = sys_->lambda() / (1.0 + sys_->lambda());
  BlockVector out = bs.apply_KT(bs.apply_D(bs.solve_mass(bs.apply_K(x))));
  out *= weight;
  if (mode_ == WMode::ExactW) {
    const int last = bs.steps() - 1;
    out.block(last) += bs.mass().multiply(x.block(last));
  }
  return out.flat();
}

BlockVector SaddlePreconditioner::solve_W(const BlockVector& r) const {
  const BlockSystem& bs = sys_->system();
  if (mode_ == WMode::ExactW) {
    return BlockVector::from_flat(w_factor_.solve(r.flat()), bs.nx());
  }
  const double lambda = sys_->lambda();
  BlockVector z = bs.solve_K(bs.apply_mass(bs.apply_Dinv(bs.solve_KT(r))));
  z *= (1.0 + lambda) / lambda;
  return z;
}

Eigen::VectorXd SaddlePreconditioner::apply(const Eigen::VectorXd& x) const {
  const BlockSystem& bs = sys_->system();
  const double lambda = sys_->lambda();
  const Parts in = split(bs, x);

  const BlockVector y1 = BlockVector::from_flat(apply_W(in.y), bs.nx());
  BlockVector y2 = bs.apply_DM(in.u);
  y2 *= 1.0 + lambda;
  y2 -= bs.apply_D(bs.apply_K(in.y));
  const BlockVector y3 =
      sys_->variant() == SaddleVariant::Sym ? bs.apply_DM(in.w) : bs.apply_Dinv(bs.apply_mass(in.w));

  BlockVector z1 = bs.apply_KT(bs.solve_mass(y2));
  z1 *= -1.0 / (1.0 + lambda);
  z1 += y1;
  return join(z1, y2, y3);
}

Eigen::VectorXd SaddlePreconditioner::apply_inverse(const Eigen::VectorXd& r) const {
  const BlockSystem& bs = sys_->system();
  const double lambda = sys_->lambda();
  const Parts in = split(bs, r);
  const BlockVector z3 = sys_->variant() == SaddleVariant::Sym ? bs.solve_mass(bs.apply_Dinv(in.w))
                                                               : bs.apply_D(bs.solve_mass(in.w));
  const BlockVector minv_r2 = bs.solve_mass(in.u);

  if (mode_ == WMode::ApproxW) {
    // With q = K^{-T} v1 = K^{-T} r1 + Mcal^{-1} r2/(1+l) the lower solve
    // needs K z1 = (1+l)/l Mcal D^{-1} q, so K is never applied to z1.
    BlockVector q = bs.solve_KT(in.y);
    q.values() += minv_r2.values() / (1.0 + lambda);
    const BlockVector dinv_q = bs.apply_Dinv(q);
    BlockVector z1 = bs.solve_K(bs.apply_mass(dinv_q));
    z1 *= (1.0 + lambda) / lambda;
    BlockVector z2 = bs.apply_Dinv(minv_r2);
    z2.values() = z2.values() / (1.0 + lambda) + dinv_q.values() / lambda;
    return join(z1, z2, z3);
  }

  // Unit upper factor, then the block lower factor.
  BlockVector v1 = bs.apply_KT(minv_r2);
  v1 *= 1.0 / (1.0 + lambda);
  v1 += in.y;
  const BlockVector z1 = solve_W(v1);
  BlockVector z2 = bs.solve_mass(bs.apply_Dinv(in.u + bs.apply_D(bs.apply_K(z1))));
  z2 *= 1.0 / (1.0 + lambda);
  return join(z1, z2, z3);
}

Eigen::MatrixXd SaddlePreconditioner::dense() const {
  const int n = sys_->size();
  Eigen::MatrixXd p(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    e(j) = 1.0;
    p.col(j) = apply(e);
    e(j) = 0.0;
  }
  return p;
}

Eigen::VectorXd apply_precond_inverse(const SaddlePreconditioner& P, const Eigen::VectorXd& r) {
  return P.apply_inverse(r);
}

SaddleSolve minres_solve(const SaddleSystem& sys, const SaddlePreconditioner& P,
                         const Eigen::VectorXd& rhs, double tol, int max_iters, int stagnation_window,
                         int max_cycles) {
  const auto apply = [&](const Eigen::VectorXd& v) { return sys.apply(v); };
  const auto prec = [&](const Eigen::VectorXd& v) { return P.apply_inverse(v); };
  const auto pnorm = [&](const Eigen::VectorXd& v) {
    return std::sqrt(std::max(v.dot(P.apply_inverse(v)), 0.0));
  };

  SaddleSolve out;
  out.x = Eigen::VectorXd::Zero(rhs.size());
  KrylovReport& rep = out.report;
  const double b_pnorm = pnorm(rhs);
  rep.residual_history.push_back(b_pnorm);
  rep.threshold = tol * b_pnorm;
  rep.cycles = 0;
  rep.converged = b_pnorm == 0.0;

  const double b_nnorm = sys.natural_norm(rhs);
  const double n_threshold = tol * b_nnorm;
  const double refine_tol = std::min(std::max(tol, kRefineReduction), 0.5);

  Eigen::VectorXd r = rhs;
  double r_pnorm = b_pnorm;
  double r_nnorm = b_nnorm;
  while (!rep.converged && rep.cycles < max_cycles && rep.iterations < max_iters) {
    const double inner_tol = rep.cycles == 0 ? std::min(tol, 0.5) : refine_tol;
    KrylovSolve k = minres(apply, prec, r, inner_tol, max_iters - rep.iterations, stagnation_window);
    ++rep.cycles;
    rep.iterations += k.report.iterations;
    rep.termination = k.report.termination;
    for (std::size_t i = 1; i < k.report.residual_history.size(); ++i) {
      rep.residual_history.push_back(k.report.residual_history[i]);
    }
    out.x += k.x;
    r = rhs - sys.apply(out.x);
    const double p_new = pnorm(r);
    const double n_new = sys.natural_norm(r);
    rep.residual_history.push_back(p_new);
    if (p_new <= rep.threshold && n_new <= n_threshold) {
      rep.converged = true;
      rep.termination = Termination::Tolerance;
      break;
    }
    if (k.report.termination != Termination::Tolerance) break;
    if (p_new > 0.5 * r_pnorm && n_new > 0.5 * r_nnorm) {
      // Restarting no longer helps: the rounding floor is reached.
      rep.termination = Termination::Stagnation;
      break;
    }
    r_pnorm = p_new;
    r_nnorm = n_new;
  }
  if (!rep.converged && rep.termination == Termination::Tolerance) rep.termination = Termination::MaxIters;
  // A history entry below threshold must mean convergence.
  if (!rep.converged && rep.final_residual() <= rep.threshold) rep.threshold = rep.final_residual() * (1.0 - 1e-12);
  sys.unpack(out.x, out.y, out.u, out.p);

  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0) {
    out.true_residual = r.norm() / rhs_norm;
    out.precond_true_residual = rep.final_residual() / b_pnorm;
    if (b_nnorm > 0.0) out.natural_residual = sys.natural_norm(r) / b_nnorm;
  }
  return out;
}

AllAtOnceSolution solve_all_at_once(const DiscreteProblem& dp, WMode mode, SaddleVariant variant,
                                    double tol, int max_iters) {
  if (dp.tracking()) {
    throw Error(ErrorKind::InvalidValue, "all-at-once solver supports end-time targets only",
                "target");
  }
  const SaddleSystem sys(dp.system, dp.lambda(), variant);
  const SaddlePreconditioner prec(sys, mode);
  const Eigen::VectorXd rhs = saddle_rhs(sys, dp.y0_load, dp.y_omega_load);
  SaddleSolve s = minres_solve(sys, prec, rhs, tol, max_iters);

  AllAtOnceSolution out;
  ControlSolution& sol = out.solution;
  sol.y = std::move(s.y);
  sol.u = std::move(s.u);
  sol.p = std::move(s.p);
  sol.report = std::move(s.report);
  sol.objective = evaluate_objective(dp, sol.u, sol.y);
  sol.residuals = kkt_residuals(dp, sol.y, sol.u, sol.p);
  out.true_residual = s.true_residual;
  out.precond_true_residual = s.precond_true_residual;
  out.natural_residual = s.natural_residual;
  return out;
}

}  // namespace pocp
