#include "pocp/mesh.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Dense>

#include "pocp/error.hpp"

namespace pocp {

namespace {

double signed_measure(const Eigen::MatrixXd& coords, const IndexMatrix& elements, int e) {
  if (coords.rows() == 1) {
    return coords(0, elements(1, e)) - coords(0, elements(0, e));
  }
  const Eigen::Vector2d a = coords.col(elements(0, e));
  const Eigen::Vector2d b = coords.col(elements(1, e));
  const Eigen::Vector2d c = coords.col(elements(2, e));
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

SpatialMesh::SpatialMesh(Eigen::MatrixXd coords, IndexMatrix elements)
    : coords_(std::move(coords)), elements_(std::move(elements)) {
  const int d = dim();
  if (d != 1 && d != 2) {
    throw Error(ErrorKind::InvalidMesh, "only 1D and 2D meshes are supported");
  }
  if (elements_.rows() != d + 1) {
    throw Error(ErrorKind::InvalidMesh, "element tuples must have dim+1 entries");
  }
  if (num_elements() == 0) {
    throw Error(ErrorKind::ZeroElements, "mesh has no elements");
  }
  for (int e = 0; e < num_elements(); ++e) {
    for (int k = 0; k <= d; ++k) {
      const int idx = elements_(k, e);
      if (idx < 0 || idx >= num_nodes()) {
        throw Error(ErrorKind::InvalidMesh,
                    "element " + std::to_string(e) + " references node " + std::to_string(idx));
      }
    }
    if (!(signed_measure(coords_, elements_, e) > 0.0)) {
      throw Error(ErrorKind::InvalidMesh,
                  "element " + std::to_string(e) + " has non-positive measure");
    }
  }
}

double SpatialMesh::element_measure(int e) const { return signed_measure(coords_, elements_, e); }

double SpatialMesh::total_measure() const {
  double sum = 0.0;
  for (int e = 0; e < num_elements(); ++e) sum += element_measure(e);
  return sum;
}

Eigen::VectorXd SpatialMesh::barycentric(int e, const Eigen::Ref<const Eigen::VectorXd>& point) const {
  const int d = dim();
  Eigen::VectorXd lam(d + 1);
  if (d == 1) {
    const double x0 = coords_(0, elements_(0, e));
    const double x1 = coords_(0, elements_(1, e));
    lam(1) = (point(0) - x0) / (x1 - x0);
    lam(0) = 1.0 - lam(1);
    return lam;
  }
  const Eigen::Vector2d a = coords_.col(elements_(0, e));
  Eigen::Matrix2d jac;
  jac.col(0) = coords_.col(elements_(1, e)) - a;
  jac.col(1) = coords_.col(elements_(2, e)) - a;
  const Eigen::Vector2d rs = jac.inverse() * (point.head<2>() - a);
  lam << 1.0 - rs.sum(), rs(0), rs(1);
  return lam;
}

bool SpatialMesh::contains(const Eigen::Ref<const Eigen::VectorXd>& point, double tol) const {
  if (point.size() != dim()) return false;
  for (int k = 0; k < dim(); ++k) {
    if (!(point(k) >= -tol && point(k) <= 1.0 + tol)) return false;
  }
  return true;
}

std::optional<int> SpatialMesh::locate(const Eigen::Ref<const Eigen::VectorXd>& point) const {
  constexpr double tol = 1e-12;
  if (!contains(point)) return std::nullopt;
  // Brute force: meshes here are desk scale and lookups are rare.
  for (int e = 0; e < num_elements(); ++e) {
    const Eigen::VectorXd lam = barycentric(e, point);
    if (lam.minCoeff() >= -tol) return e;
  }
  return std::nullopt;
}

SpatialMesh build_interval_mesh(int n_elems) {
  if (n_elems < 1) {
    throw Error(ErrorKind::ZeroElements, "interval mesh needs at least one element", "n_elems");
  }
  Eigen::MatrixXd coords(1, n_elems + 1);
  for (int k = 0; k <= n_elems; ++k) {
    coords(0, k) = static_cast<double>(k) / n_elems;
  }
  IndexMatrix elements(2, n_elems);
  for (int e = 0; e < n_elems; ++e) {
    elements(0, e) = e;
    elements(1, e) = e + 1;
  }
  return SpatialMesh(std::move(coords), std::move(elements));
}

SpatialMesh build_unit_square_mesh(int n_per_side) {
  if (n_per_side < 1) {
    throw Error(ErrorKind::ZeroElements, "square mesh needs at least one cell per side",
                "n_per_side");
  }
  const int n = n_per_side;
  const int stride = n + 1;
  Eigen::MatrixXd coords(2, stride * stride);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      coords(0, j * stride + i) = static_cast<double>(i) / n;
      coords(1, j * stride + i) = static_cast<double>(j) / n;
    }
  }
  IndexMatrix elements(3, 2 * n * n);
  int e = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int ll = j * stride + i;
      const int lr = ll + 1;
      const int ul = ll + stride;
      const int ur = ul + 1;
      elements.col(e++) << ll, lr, ur;
      elements.col(e++) << ll, ur, ul;
    }
  }
  return SpatialMesh(std::move(coords), std::move(elements));
}

void write_mesh(std::ostream& out, const SpatialMesh& mesh) {
  out.precision(17);
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    out << "node " << k;
    for (int d = 0; d < mesh.dim(); ++d) out << ' ' << mesh.coords()(d, k);
    out << '\n';
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    out << "elem " << e;
    for (int k = 0; k <= mesh.dim(); ++k) out << ' ' << mesh.elements()(k, e);
    out << '\n';
  }
}

}  // namespace pocp
