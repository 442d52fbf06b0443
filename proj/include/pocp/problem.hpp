#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "pocp/mesh.hpp"

namespace pocp {

/// Scalar data on the spatial domain, optionally time dependent.
///
/// Catalog entries are analytic and can be evaluated anywhere in [0,1]^d.
/// Tabulated functions carry nodal values on a mesh and are evaluated through
/// their P1 interpolant.
class DataFunction {
 public:
  enum class Kind { Zero, Constant, CosProduct, CosProductDecay, Tabulated };

  static DataFunction zero();
  static DataFunction constant(double value);
  /// amplitude * prod_i cos(frequency * pi * x_i)
  static DataFunction cos_product(double frequency = 1.0, double amplitude = 1.0);
  /// exp(-rate * t) * cos_product(frequency, amplitude); time dependent.
  static DataFunction cos_product_decay(double frequency, double rate, double amplitude = 1.0);
  static DataFunction tabulated(std::shared_ptr<const SpatialMesh> mesh, Eigen::VectorXd values);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;
  bool time_dependent() const noexcept { return kind_ == Kind::CosProductDecay; }

  double frequency() const noexcept { return frequency_; }
  double amplitude() const noexcept { return amplitude_; }
  double rate() const noexcept { return rate_; }

  /// Nodal values and their mesh; null for catalog entries.
  const Eigen::VectorXd* nodal_values() const noexcept;
  const SpatialMesh* mesh() const noexcept { return mesh_.get(); }

  /// Throws OutOfDomain outside [0,1]^d, and InvalidValue when a time
  /// dependent function is evaluated without a time.
  double eval(const Eigen::Ref<const Eigen::VectorXd>& point,
              std::optional<double> time = std::nullopt) const;

  friend bool operator==(const DataFunction& a, const DataFunction& b);

 private:
  DataFunction(Kind kind, double amplitude, double frequency, double rate);

  Kind kind_;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  double rate_ = 0.0;
  std::shared_ptr<const SpatialMesh> mesh_;
  std::shared_ptr<const Eigen::VectorXd> values_;
};

double eval_data(const DataFunction& f, const Eigen::Ref<const Eigen::VectorXd>& point,
                 std::optional<double> time = std::nullopt);

struct EndTimeTarget {
  DataFunction y_omega;
  friend bool operator==(const EndTimeTarget&, const EndTimeTarget&) = default;
};

struct TrackingTarget {
  DataFunction y_q;
  friend bool operator==(const TrackingTarget&, const TrackingTarget&) = default;
};

using TargetSpec = std::variant<EndTimeTarget, TrackingTarget>;

/// Continuous problem: minimize the end-time (or tracking) misfit plus
/// lambda/2 ||u||^2 subject to y_t - div(alpha grad y) + c y = u with
/// homogeneous Neumann boundary and y(0) = y0.
struct ProblemSpec {
  int dim = 1;
  double T = 1.0;
  double lambda = 1.0;
  double alpha = 1.0;
  double c = 0.0;
  std::optional<DataFunction> y0;
  std::optional<TargetSpec> target;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

/// A ProblemSpec that passed validation, with defaults filled in (y0 = 0).
class ValidatedProblem {
 public:
  const ProblemSpec& spec() const noexcept { return spec_; }
  const DataFunction& y0() const { return *spec_.y0; }
  const TargetSpec& target() const { return *spec_.target; }
  bool is_tracking() const { return std::holds_alternative<TrackingTarget>(*spec_.target); }

  friend bool operator==(const ValidatedProblem&, const ValidatedProblem&) = default;

 private:
  friend ValidatedProblem validate(const ProblemSpec& spec);
  explicit ValidatedProblem(ProblemSpec spec) : spec_(std::move(spec)) {}
  ProblemSpec spec_;
};

ValidatedProblem validate(const ProblemSpec& spec);

}  // namespace pocp
