#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "pocp/fem.hpp"

namespace pocp {

/// 0 = t_0 < t_1 < ... < t_N = T with step sizes tau_1..tau_N.
class TimeGrid {
 public:
  int steps() const noexcept { return static_cast<int>(taus_.size()); }
  double T() const noexcept { return times_.back(); }
  /// tau(n) for n = 0..N-1 is the length of interval n+1.
  double tau(int n) const { return taus_[static_cast<std::size_t>(n)]; }
  const std::vector<double>& taus() const noexcept { return taus_; }
  /// N+1 node times, times()[0] == 0.
  const std::vector<double>& times() const noexcept { return times_; }
  double tau_max() const;
  bool uniform() const;

 private:
  friend TimeGrid build_time_grid(double T, int N, std::optional<std::vector<double>> taus);
  std::vector<double> taus_;
  std::vector<double> times_;
};

/// Uniform grid tau = T/N unless explicit step sizes are supplied.
TimeGrid build_time_grid(double T, int N, std::optional<std::vector<double>> taus = std::nullopt);

/// Time-indexed sequence of spatial coefficient vectors. Stored as an
/// n_x-by-N matrix, one column per time interval, so the flattened vector is
/// the block vector (block 1, block 2, ...).
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(int nx, int steps) : values_(Eigen::MatrixXd::Zero(nx, steps)) {}
  explicit BlockVector(Eigen::MatrixXd values) : values_(std::move(values)) {}

  static BlockVector from_flat(const Eigen::Ref<const Eigen::VectorXd>& flat, int nx);

  int nx() const noexcept { return static_cast<int>(values_.rows()); }
  int steps() const noexcept { return static_cast<int>(values_.cols()); }
  Eigen::Index size() const noexcept { return values_.size(); }

  auto block(int n) { return values_.col(n); }
  auto block(int n) const { return values_.col(n); }

  Eigen::MatrixXd& values() noexcept { return values_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  Eigen::Map<Eigen::VectorXd> flat() { return {values_.data(), values_.size()}; }
  Eigen::Map<const Eigen::VectorXd> flat() const { return {values_.data(), values_.size()}; }

  BlockVector& operator+=(const BlockVector& o) { values_ += o.values_; return *this; }
  BlockVector& operator-=(const BlockVector& o) { values_ -= o.values_; return *this; }
  BlockVector& operator*=(double s) { values_ *= s; return *this; }
  friend BlockVector operator+(BlockVector a, const BlockVector& b) { return a += b; }
  friend BlockVector operator-(BlockVector a, const BlockVector& b) { return a -= b; }
  friend BlockVector operator*(double s, BlockVector a) { return a *= s; }

 private:
  Eigen::MatrixXd values_;
};

/// Column-per-time-step text table: one row per spatial node, one
/// whitespace-separated column per time step.
void write_block_vector(std::ostream& out, const BlockVector& v);
BlockVector read_block_vector(std::istream& in);

/// Block operators of the implicit Euler / P1 discretization on a fixed mesh:
///
///   K = block lower bidiagonal, diagonal blocks S_j = M/tau_j + A_j,
///       subdiagonal blocks -M/tau_j
///   Mcal = diag(M),  D = diag(tau_j I)
///
/// One factorization is cached per distinct (tau_j, alpha_j, c_j).
/// Immutable after construction; sweeps are safe to run concurrently.
class BlockSystem {
 public:
  BlockSystem(std::shared_ptr<const SpatialDiscretization> disc, TimeGrid grid,
              std::vector<double> alpha, std::vector<double> c);

  int nx() const noexcept { return disc_->size(); }
  int steps() const noexcept { return grid_.steps(); }
  int m() const noexcept { return nx() * steps(); }
  const TimeGrid& grid() const noexcept { return grid_; }
  const SpatialDiscretization& discretization() const noexcept { return *disc_; }
  std::shared_ptr<const SpatialDiscretization> discretization_ptr() const noexcept { return disc_; }
  const SymSparseMatrix& mass() const noexcept { return disc_->mass; }
  /// A_j = alpha_j L + c_j M for interval j (0-based).
  const SymSparseMatrix& stiffness(int j) const;
  /// S_j = M/tau_j + A_j.
  const SymSparseMatrix& step_matrix(int j) const;
  const SymFactorization& step_factorization(int j) const;
  int factorization_count() const noexcept { return static_cast<int>(steps_.size()); }

  BlockVector zeros() const { return BlockVector(nx(), steps()); }

  BlockVector apply_K(const BlockVector& y) const;
  BlockVector apply_KT(const BlockVector& p) const;
  /// K^{-1} rhs by a forward sweep.
  BlockVector solve_K(const BlockVector& rhs) const;
  /// K^{-T} rhs by a backward sweep.
  BlockVector solve_KT(const BlockVector& rhs) const;

  BlockVector apply_mass(const BlockVector& x) const;       // Mcal x
  BlockVector solve_mass(const BlockVector& x) const;       // Mcal^{-1} x
  BlockVector apply_D(const BlockVector& x) const;          // D x
  BlockVector apply_Dinv(const BlockVector& x) const;       // D^{-1} x
  BlockVector apply_DM(const BlockVector& x) const;         // D Mcal x
  /// (x, z)_{D Mcal} = sum_n tau_n x_n^T M z_n, the discrete L2(Q) product.
  double inner_DM(const BlockVector& x, const BlockVector& z) const;
  /// Same product when M z is already available.
  double inner_D(const BlockVector& x, const BlockVector& mass_z) const;

  /// State sweep: S_1 y_1 = y0_load/tau_1 + M u_1,
  /// S_n y_n = M y_{n-1}/tau_n + M u_n. Equivalent to K y = Mcal u + init.
  BlockVector solve_forward(const BlockVector& u, const Eigen::Ref<const Eigen::VectorXd>& y0_load) const;

  /// Adjoint sweep for j = N..1: S_j p_j = M p_{j+1}/tau_j + source_j with
  /// p_{N+1} = terminal (coefficients).
  BlockVector solve_backward(const Eigen::Ref<const Eigen::VectorXd>& terminal,
                             const BlockVector* source = nullptr) const;

  /// Dense K, Mcal and D for small verification instances.
  Eigen::MatrixXd dense_K() const;
  Eigen::MatrixXd dense_mass() const;
  Eigen::VectorXd d_diagonal() const;

 private:
  void check(const BlockVector& v, const char* what) const;

  std::shared_ptr<const SpatialDiscretization> disc_;
  TimeGrid grid_;
  std::vector<SymSparseMatrix> stiffness_;       // distinct (alpha, c)
  std::vector<int> stiffness_index_;             // per interval
  std::vector<SymSparseMatrix> steps_;           // distinct (tau, alpha, c)
  std::vector<int> step_index_;                  // per interval
};

/// Constant coefficients. `disc` must come from make_discretization (mass
/// factorized).
BlockSystem assemble_block_system(std::shared_ptr<const SpatialDiscretization> disc,
                                  const TimeGrid& grid, double alpha, double c);
/// Piecewise constant in time: one (alpha_j, c_j) per interval.
BlockSystem assemble_block_system(std::shared_ptr<const SpatialDiscretization> disc,
                                  const TimeGrid& grid, std::vector<double> alpha,
                                  std::vector<double> c);

/// Constant gamma of the a-priori estimate ||y_N||^2 <= gamma ||u||^2_{L2(Q)}
/// for a reaction coefficient bounded below by c0:
///   2 c0 > -1/T:  gamma = 3T / (1 + 2 c0 T),  valid for tau <= 0.001 T
///   otherwise:    gamma = 3T exp(-2.002 c0 T), valid for tau <= 0.001 T / (1 - 2 c0 T)
/// When tau_max is given it must lie in the regime, else StepTooLarge.
double gamma_bound(double c0, double T, std::optional<double> tau_max = std::nullopt);

}  // namespace pocp
