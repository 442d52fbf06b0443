#include "pocp/fem.hpp"

#include <cmath>
#include <iostream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "pocp/error.hpp"

namespace pocp {

using LltSolver = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower>;
using LdltSolver = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower>;

struct SymFactorization::Impl {
  std::unique_ptr<LltSolver> llt;
  std::unique_ptr<LdltSolver> ldlt;
};

SymFactorization::SymFactorization(const SparseMatrix& lower) : impl_(std::make_unique<Impl>()) {
  impl_->llt = std::make_unique<LltSolver>(lower);
  if (impl_->llt->info() == Eigen::Success) return;
  impl_->llt.reset();

  impl_->ldlt = std::make_unique<LdltSolver>(lower);
  if (impl_->ldlt->info() != Eigen::Success) {
    throw Error(ErrorKind::FactorizationFailed, "symmetric factorization failed");
  }
  const Eigen::VectorXd d = impl_->ldlt->vectorD();
  const double scale = d.cwiseAbs().maxCoeff();
  if (!d.allFinite() || d.cwiseAbs().minCoeff() <= 1e-14 * scale) {
    throw Error(ErrorKind::FactorizationFailed, "matrix is numerically singular");
  }
  std::clog << "pocp: warning: step matrix is indefinite, using LDL^T without pivoting\n";
}

SymFactorization::~SymFactorization() = default;
SymFactorization::SymFactorization(SymFactorization&&) noexcept = default;
SymFactorization& SymFactorization::operator=(SymFactorization&&) noexcept = default;

bool SymFactorization::indefinite() const noexcept { return impl_->ldlt != nullptr; }

Eigen::VectorXd SymFactorization::solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  if (impl_->llt) return impl_->llt->solve(rhs);
  return impl_->ldlt->solve(rhs);
}

Eigen::MatrixXd SymFactorization::solve_columns(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
  if (impl_->llt) return impl_->llt->solve(rhs);
  return impl_->ldlt->solve(rhs);
}

Eigen::MatrixXd SymFactorization::reconstruct() const {
  if (impl_->llt) {
    const SparseMatrix ls = impl_->llt->matrixL();
    const Eigen::MatrixXd l(ls);
    const Eigen::MatrixXd llt = l * l.transpose();
    return impl_->llt->permutationPinv() * llt * impl_->llt->permutationP();
  }
  const SparseMatrix ls = impl_->ldlt->matrixL();
  const Eigen::MatrixXd l(ls);
  const Eigen::MatrixXd ldlt = l * impl_->ldlt->vectorD().asDiagonal() * l.transpose();
  return impl_->ldlt->permutationPinv() * ldlt * impl_->ldlt->permutationP();
}

SymSparseMatrix::SymSparseMatrix(SparseMatrix lower) : lower_(std::move(lower)) {
  lower_.makeCompressed();
}

Eigen::VectorXd SymSparseMatrix::multiply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return lower_.selfadjointView<Eigen::Lower>() * x;
}

Eigen::MatrixXd SymSparseMatrix::multiply_columns(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  return lower_.selfadjointView<Eigen::Lower>() * x;
}

double SymSparseMatrix::entry(int row, int col) const {
  return row >= col ? lower_.coeff(row, col) : lower_.coeff(col, row);
}

SparseMatrix SymSparseMatrix::full() const {
  SparseMatrix out = lower_.selfadjointView<Eigen::Lower>();
  return out;
}

Eigen::MatrixXd SymSparseMatrix::dense() const { return Eigen::MatrixXd(full()); }

const SymFactorization& SymSparseMatrix::factorize() {
  if (!factorization_) factorization_ = std::make_shared<const SymFactorization>(lower_);
  return *factorization_;
}

const SymFactorization& SymSparseMatrix::factorization() const {
  if (!factorization_) throw Error(ErrorKind::FactorizationFailed, "matrix not factorized");
  return *factorization_;
}

Eigen::VectorXd SymSparseMatrix::solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  return factorization().solve(rhs);
}

SymSparseMatrix SymSparseMatrix::combine(double a, const SymSparseMatrix& other, double b) const {
  if (other.size() != size()) throw Error(ErrorKind::SizeMismatch, "matrix sizes differ");
  SparseMatrix sum = a * lower_ + b * other.lower_;
  return SymSparseMatrix(std::move(sum));
}

namespace {

using Triplet = Eigen::Triplet<double, int>;

// Local mass and stiffness for element e, (dim+1)x(dim+1).
void element_matrices(const SpatialMesh& mesh, int e, Eigen::MatrixXd& mass, Eigen::MatrixXd& grad) {
  const double meas = mesh.element_measure(e);
  if (mesh.dim() == 1) {
    mass.resize(2, 2);
    mass << 2.0, 1.0, 1.0, 2.0;
    mass *= meas / 6.0;
    grad.resize(2, 2);
    grad << 1.0, -1.0, -1.0, 1.0;
    grad /= meas;
    return;
  }
  mass.resize(3, 3);
  mass << 2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0;
  mass *= meas / 12.0;

  const auto& el = mesh.elements();
  const Eigen::Vector2d a = mesh.coords().col(el(0, e));
  Eigen::Matrix2d jac;
  jac.col(0) = mesh.coords().col(el(1, e)) - a;
  jac.col(1) = mesh.coords().col(el(2, e)) - a;
  Eigen::Matrix<double, 2, 3> ref_grads;
  ref_grads << -1.0, 1.0, 0.0, -1.0, 0.0, 1.0;
  const Eigen::Matrix<double, 2, 3> grads = jac.inverse().transpose() * ref_grads;
  grad = meas * (grads.transpose() * grads);
}

SparseMatrix assemble_lower(const SpatialMesh& mesh, double mass_weight, double grad_weight) {
  std::vector<Triplet> triplets;
  const int nloc = mesh.dim() + 1;
  triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * nloc * nloc);
  Eigen::MatrixXd m_loc, g_loc;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    element_matrices(mesh, e, m_loc, g_loc);
    for (int i = 0; i < nloc; ++i) {
      const int gi = mesh.elements()(i, e);
      for (int j = 0; j < nloc; ++j) {
        const int gj = mesh.elements()(j, e);
        if (gi < gj) continue;
        triplets.emplace_back(gi, gj, mass_weight * m_loc(i, j) + grad_weight * g_loc(i, j));
      }
    }
  }
  SparseMatrix lower(mesh.num_nodes(), mesh.num_nodes());
  lower.setFromTriplets(triplets.begin(), triplets.end());
  return lower;
}

}  // namespace

SymSparseMatrix assemble_mass(const SpatialMesh& mesh) {
  return SymSparseMatrix(assemble_lower(mesh, 1.0, 0.0));
}

SymSparseMatrix assemble_stiffness(const SpatialMesh& mesh, double alpha, double c) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::NegativeAlpha, "alpha must be non-negative", "alpha");
  return SymSparseMatrix(assemble_lower(mesh, c, alpha));
}

Eigen::VectorXd assemble_load(const SpatialMesh& mesh, const DataFunction& f,
                              std::optional<double> time) {
  const int n = mesh.num_nodes();
  if (const Eigen::VectorXd* values = f.nodal_values()) {
    if (values->size() != n) {
      throw Error(ErrorKind::SizeMismatch, "tabulated values do not match mesh");
    }
    return assemble_mass(mesh).multiply(*values);
  }

  Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
  const auto& el = mesh.elements();
  if (mesh.dim() == 1) {
    const double s = std::sqrt(0.6) / 2.0;
    const double pts[3] = {0.5 - s, 0.5, 0.5 + s};
    const double wts[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    Eigen::VectorXd x(1);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const int i0 = el(0, e);
      const int i1 = el(1, e);
      const double x0 = mesh.coords()(0, i0);
      const double h = mesh.element_measure(e);
      for (int q = 0; q < 3; ++q) {
        x(0) = x0 + pts[q] * h;
        const double fv = wts[q] * h * f.eval(x, time);
        load(i0) += fv * (1.0 - pts[q]);
        load(i1) += fv * pts[q];
      }
    }
    return load;
  }

  // Edge midpoints: phi_k is 1/2 on the two edges touching vertex k.
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double w = mesh.element_measure(e) / 3.0;
    double fmid[3];  // fmid[k]: value at the midpoint of the edge opposite vertex k
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd mid =
          0.5 * (mesh.coords().col(el((k + 1) % 3, e)) + mesh.coords().col(el((k + 2) % 3, e)));
      fmid[k] = f.eval(mid, time);
    }
    for (int k = 0; k < 3; ++k) {
      load(el(k, e)) += w * 0.5 * (fmid[(k + 1) % 3] + fmid[(k + 2) % 3]);
    }
  }
  return load;
}

SpatialDiscretization make_discretization(std::shared_ptr<const SpatialMesh> mesh) {
  if (!mesh) throw Error(ErrorKind::InvalidMesh, "null mesh");
  SpatialDiscretization disc{mesh, assemble_mass(*mesh), assemble_stiffness(*mesh, 1.0, 0.0)};
  disc.mass.factorize();
  return disc;
}

void write_triplets(std::ostream& out, const SymSparseMatrix& matrix) {
  const SparseMatrix full = matrix.full();
  out.precision(17);
  for (int k = 0; k < full.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(full, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

void write_triplets(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& dense,
                    double drop_tol) {
  out.precision(17);
  for (Eigen::Index j = 0; j < dense.cols(); ++j) {
    for (Eigen::Index i = 0; i < dense.rows(); ++i) {
      if (std::abs(dense(i, j)) > drop_tol) out << i << ' ' << j << ' ' << dense(i, j) << '\n';
    }
  }
}

}  // namespace pocp
