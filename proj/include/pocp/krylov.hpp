#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace pocp {

enum class Termination { Tolerance, MaxIters, Breakdown, Stagnation };

std::string_view to_string(Termination t);

/// Outcome of a Krylov run. `residual_history[0]` is the initial residual;
/// entry k is the residual after k iterations, in the norm the method
/// minimizes or monitors. converged == (residual_history.back() <= threshold).
struct KrylovReport {
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  Termination termination = Termination::Tolerance;
  double threshold = 0.0;
  /// Number of Krylov runs; > 1 when restarted on the true residual.
  int cycles = 1;

  double initial_residual() const { return residual_history.empty() ? 0.0 : residual_history.front(); }
  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

/// Tracks the best residual; reports stagnation once `window` consecutive
/// iterations fail to lower it by a relative 1e-3.
class StagnationMonitor {
 public:
  explicit StagnationMonitor(int window) : window_(window) {}
  /// Returns true if `residual` is a new best.
  bool update(double residual);
  bool stagnated() const { return window_ > 0 && stale_ >= window_; }

 private:
  int window_;
  int stale_ = 0;
  double best_ = -1.0;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovSolve {
  Eigen::VectorXd x;
  KrylovReport report;
};

/// Preconditioned MINRES with zero initial guess. `precond_inverse` must be
/// symmetric positive definite; the monitored residual is the preconditioned
/// norm sqrt(r^T P^{-1} r), stopping when it falls to tol times its initial
/// value.
KrylovSolve minres(const LinearOperator& apply, const LinearOperator& precond_inverse,
                   const Eigen::VectorXd& rhs, double tol, int max_iters, int stagnation_window = 50);

}  // namespace pocp
