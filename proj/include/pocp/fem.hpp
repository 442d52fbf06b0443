#pragma once

#include <iosfwd>
#include <memory>
#include <optional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pocp/mesh.hpp"
#include "pocp/problem.hpp"

namespace pocp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Sparse symmetric factorization. Cholesky when the matrix is positive
/// definite, unpivoted LDL^T otherwise.
class SymFactorization {
 public:
  /// Throws FactorizationFailed when neither factorization succeeds.
  explicit SymFactorization(const SparseMatrix& lower);
  ~SymFactorization();
  SymFactorization(SymFactorization&&) noexcept;
  SymFactorization& operator=(SymFactorization&&) noexcept;

  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;
  Eigen::MatrixXd solve_columns(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;

  /// True when the matrix was indefinite and LDL^T was used.
  bool indefinite() const noexcept;

  /// Dense reconstruction P^T L D L^T P, for multiply-back checks.
  Eigen::MatrixXd reconstruct() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Symmetric sparse matrix storing only its lower triangle.
class SymSparseMatrix {
 public:
  SymSparseMatrix() = default;
  explicit SymSparseMatrix(SparseMatrix lower);

  int size() const noexcept { return static_cast<int>(lower_.rows()); }
  const SparseMatrix& lower() const noexcept { return lower_; }

  Eigen::VectorXd multiply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd multiply_columns(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  double entry(int row, int col) const;
  SparseMatrix full() const;
  Eigen::MatrixXd dense() const;

  /// Computes and caches the factorization; safe to call repeatedly.
  const SymFactorization& factorize();
  bool factorized() const noexcept { return factorization_ != nullptr; }
  /// Requires factorize() to have been called.
  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;
  const SymFactorization& factorization() const;

  /// a*this + b*other, both on the same sparsity union.
  SymSparseMatrix combine(double a, const SymSparseMatrix& other, double b) const;

 private:
  SparseMatrix lower_;
  std::shared_ptr<const SymFactorization> factorization_;
};

/// M_kl = int phi_l phi_k, exact element integrals.
SymSparseMatrix assemble_mass(const SpatialMesh& mesh);

/// A_kl = alpha int grad phi_l . grad phi_k + c int phi_l phi_k.
SymSparseMatrix assemble_stiffness(const SpatialMesh& mesh, double alpha, double c);

/// (f, phi_k)_k. Analytic data uses 3-point Gauss per segment in 1D and the
/// edge-midpoint rule on triangles; tabulated data is integrated exactly as
/// its P1 interpolant (M * values).
Eigen::VectorXd assemble_load(const SpatialMesh& mesh, const DataFunction& f,
                              std::optional<double> time = std::nullopt);

/// Mesh plus its mass matrix (factorized) and the unit-diffusion stiffness
/// (alpha = 1, c = 0). Immutable after construction.
struct SpatialDiscretization {
  std::shared_ptr<const SpatialMesh> mesh;
  SymSparseMatrix mass;
  SymSparseMatrix laplace;

  int size() const noexcept { return mass.size(); }
};

SpatialDiscretization make_discretization(std::shared_ptr<const SpatialMesh> mesh);

/// Coordinate-list export, one "i j value" line per stored nonzero of the
/// full symmetric matrix (0-based indices).
void write_triplets(std::ostream& out, const SymSparseMatrix& matrix);
void write_triplets(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& dense,
                    double drop_tol = 0.0);

}  // namespace pocp
