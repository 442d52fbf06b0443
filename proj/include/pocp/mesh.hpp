#pragma once

#include <iosfwd>
#include <optional>

#include <Eigen/Core>

namespace pocp {

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Simplicial mesh of [0,1]^dim. Segments in 1D, triangles in 2D.
///
/// Column k of `coords()` is node k; column e of `elements()` holds the
/// dim+1 node indices of element e. The boundary is implicit: every boundary
/// carries a homogeneous Neumann condition, so nothing is stored for it.
class SpatialMesh {
 public:
  /// Validates index ranges and positive element measures.
  SpatialMesh(Eigen::MatrixXd coords, IndexMatrix elements);

  int dim() const noexcept { return static_cast<int>(coords_.rows()); }
  int num_nodes() const noexcept { return static_cast<int>(coords_.cols()); }
  int num_elements() const noexcept { return static_cast<int>(elements_.cols()); }

  const Eigen::MatrixXd& coords() const noexcept { return coords_; }
  const IndexMatrix& elements() const noexcept { return elements_; }

  double element_measure(int e) const;
  double total_measure() const;

  /// Barycentric coordinates of `point` in element e.
  Eigen::VectorXd barycentric(int e, const Eigen::Ref<const Eigen::VectorXd>& point) const;

  /// Element containing `point` (within a small tolerance), if any.
  std::optional<int> locate(const Eigen::Ref<const Eigen::VectorXd>& point) const;

  /// True when the point lies in the closed unit cube up to `tol`.
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& point, double tol = 1e-12) const;

 private:
  Eigen::MatrixXd coords_;
  IndexMatrix elements_;
};

/// Uniform partition of [0,1] into `n_elems` segments.
SpatialMesh build_interval_mesh(int n_elems);

/// Structured triangulation of [0,1]^2: (n+1)^2 nodes, each cell split along
/// its lower-left to upper-right diagonal.
SpatialMesh build_unit_square_mesh(int n_per_side);

/// Node table ("node <k> <x> [<y>]") followed by element table
/// ("elem <e> <i0> <i1> [<i2>]").
void write_mesh(std::ostream& out, const SpatialMesh& mesh);

}  // namespace pocp
