#include "pocp/krylov.hpp"

#include <cmath>
#include <limits>

namespace pocp {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Tolerance: return "tolerance";
    case Termination::MaxIters: return "max_iters";
    case Termination::Breakdown: return "breakdown";
    case Termination::Stagnation: return "stagnation";
  }
  return "unknown";
}

bool StagnationMonitor::update(double residual) {
  if (best_ < 0.0 || residual < best_ * (1.0 - 1e-3)) {
    best_ = residual;
    stale_ = 0;
    return true;
  }
  if (residual < best_) best_ = residual;
  ++stale_;
  return false;
}

KrylovSolve minres(const LinearOperator& apply, const LinearOperator& precond_inverse,
                   const Eigen::VectorXd& rhs, double tol, int max_iters, int stagnation_window) {
  const Eigen::Index n = rhs.size();
  KrylovSolve out{Eigen::VectorXd::Zero(n), {}};
  KrylovReport& rep = out.report;

  Eigen::VectorXd r1 = rhs;
  Eigen::VectorXd y = precond_inverse(r1);
  const double b1sq = r1.dot(y);
  if (b1sq < 0.0) {
    rep.termination = Termination::Breakdown;
    return out;
  }
  const double beta1 = std::sqrt(b1sq);
  rep.residual_history.push_back(beta1);
  rep.threshold = tol * beta1;
  if (beta1 == 0.0) {
    rep.converged = true;
    return out;
  }

  Eigen::VectorXd r2 = r1;
  Eigen::VectorXd v(n), w = Eigen::VectorXd::Zero(n), w1(n), w2 = Eigen::VectorXd::Zero(n);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  constexpr double tiny = std::numeric_limits<double>::epsilon();
  StagnationMonitor monitor(stagnation_window);
  monitor.update(beta1);

  rep.termination = Termination::MaxIters;
  for (int itn = 1; itn <= max_iters; ++itn) {
    v = y / beta;
    y = apply(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = precond_inverse(r2);
    oldb = beta;
    const double bsq = r2.dot(y);
    if (bsq < 0.0) {
      rep.termination = Termination::Breakdown;
      break;
    }
    beta = std::sqrt(bsq);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    out.x += phi * w;

    rep.iterations = itn;
    rep.residual_history.push_back(phibar);
    monitor.update(phibar);
    if (phibar <= rep.threshold) {
      rep.converged = true;
      rep.termination = Termination::Tolerance;
      break;
    }
    if (beta == 0.0) {
      // Exact invariant subspace: x is the minimizer but the tolerance is unmet.
      rep.termination = Termination::Breakdown;
      break;
    }
    if (monitor.stagnated()) {
      rep.termination = Termination::Stagnation;
      break;
    }
  }
  return out;
}

}  // namespace pocp
