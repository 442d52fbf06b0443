#include "pocp/problem.hpp"

#include <cmath>
#include <numbers>

#include "pocp/error.hpp"

namespace pocp {

DataFunction::DataFunction(Kind kind, double amplitude, double frequency, double rate)
    : kind_(kind), amplitude_(amplitude), frequency_(frequency), rate_(rate) {}

DataFunction DataFunction::zero() { return DataFunction(Kind::Zero, 0.0, 0.0, 0.0); }

DataFunction DataFunction::constant(double value) {
  return DataFunction(Kind::Constant, value, 0.0, 0.0);
}

DataFunction DataFunction::cos_product(double frequency, double amplitude) {
  return DataFunction(Kind::CosProduct, amplitude, frequency, 0.0);
}

DataFunction DataFunction::cos_product_decay(double frequency, double rate, double amplitude) {
  return DataFunction(Kind::CosProductDecay, amplitude, frequency, rate);
}

DataFunction DataFunction::tabulated(std::shared_ptr<const SpatialMesh> mesh,
                                     Eigen::VectorXd values) {
  if (!mesh) throw Error(ErrorKind::InvalidValue, "tabulated function needs a mesh");
  if (values.size() != mesh->num_nodes()) {
    throw Error(ErrorKind::SizeMismatch, "tabulated values (" + std::to_string(values.size()) +
                                             ") do not match mesh nodes (" +
                                             std::to_string(mesh->num_nodes()) + ")");
  }
  DataFunction f(Kind::Tabulated, 1.0, 0.0, 0.0);
  f.mesh_ = std::move(mesh);
  f.values_ = std::make_shared<const Eigen::VectorXd>(std::move(values));
  return f;
}

std::string DataFunction::name() const {
  switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return "constant";
    case Kind::CosProduct: return "cos_product";
    case Kind::CosProductDecay: return "cos_product_decay";
    case Kind::Tabulated: return "tabulated";
  }
  return "unknown";
}

const Eigen::VectorXd* DataFunction::nodal_values() const noexcept { return values_.get(); }

double DataFunction::eval(const Eigen::Ref<const Eigen::VectorXd>& point,
                          std::optional<double> time) const {
  if (time_dependent() && !time) {
    throw Error(ErrorKind::InvalidValue, name() + " is time dependent and needs a time");
  }
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    if (!(point(k) >= -1e-12 && point(k) <= 1.0 + 1e-12)) {
      throw Error(ErrorKind::OutOfDomain, "point outside [0,1]^d");
    }
  }
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return amplitude_;
    case Kind::CosProduct:
    case Kind::CosProductDecay: {
      double v = amplitude_;
      for (Eigen::Index k = 0; k < point.size(); ++k) {
        v *= std::cos(frequency_ * std::numbers::pi * point(k));
      }
      if (kind_ == Kind::CosProductDecay) v *= std::exp(-rate_ * *time);
      return v;
    }
    case Kind::Tabulated: {
      if (point.size() != mesh_->dim()) {
        throw Error(ErrorKind::SizeMismatch, "point dimension does not match mesh");
      }
      const auto e = mesh_->locate(point);
      if (!e) throw Error(ErrorKind::OutOfDomain, "point not covered by mesh");
      const auto& elems = mesh_->elements();
      // Exact nodal values at nodes, interpolation elsewhere.
      for (int k = 0; k <= mesh_->dim(); ++k) {
        const int node = elems(k, *e);
        if ((mesh_->coords().col(node) - point).norm() <= 1e-14) return (*values_)(node);
      }
      const Eigen::VectorXd lam = mesh_->barycentric(*e, point);
      double v = 0.0;
      for (int k = 0; k <= mesh_->dim(); ++k) v += lam(k) * (*values_)(elems(k, *e));
      return v;
    }
  }
  return 0.0;
}

bool operator==(const DataFunction& a, const DataFunction& b) {
  if (a.kind_ != b.kind_ || a.amplitude_ != b.amplitude_ || a.frequency_ != b.frequency_ ||
      a.rate_ != b.rate_) {
    return false;
  }
  if (a.kind_ != DataFunction::Kind::Tabulated) return true;
  return a.mesh_ == b.mesh_ && (a.values_ == b.values_ || *a.values_ == *b.values_);
}

double eval_data(const DataFunction& f, const Eigen::Ref<const Eigen::VectorXd>& point,
                 std::optional<double> time) {
  return f.eval(point, time);
}

namespace {

void check_static(const DataFunction& f, int dim, const char* field) {
  if (f.time_dependent()) {
    throw Error(ErrorKind::InvalidValue, std::string(field) + " must not depend on time", field);
  }
  if (f.mesh() && f.mesh()->dim() != dim) {
    throw Error(ErrorKind::InvalidValue, std::string(field) + " is tabulated on a mesh of wrong dimension",
                field);
  }
}

}  // namespace

ValidatedProblem validate(const ProblemSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2) {
    throw Error(ErrorKind::InvalidValue, "dim must be 1 or 2", "dim");
  }
  if (!(spec.T > 0.0) || !std::isfinite(spec.T)) {
    throw Error(ErrorKind::NonPositive, "T must be positive", "T");
  }
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) {
    throw Error(ErrorKind::NonPositive, "lambda must be positive", "lambda");
  }
  if (!(spec.alpha >= 0.0) || !std::isfinite(spec.alpha)) {
    throw Error(ErrorKind::NegativeAlpha, "alpha must be non-negative", "alpha");
  }
  if (!std::isfinite(spec.c)) {
    throw Error(ErrorKind::InvalidValue, "c must be finite", "c");
  }
  if (!spec.target) {
    throw Error(ErrorKind::MissingTarget, "a target (end_time or tracking) is required", "target");
  }
  ProblemSpec out = spec;
  if (!out.y0) out.y0 = DataFunction::zero();
  check_static(*out.y0, out.dim, "y0");
  if (const auto* end = std::get_if<EndTimeTarget>(&*out.target)) {
    check_static(end->y_omega, out.dim, "y_omega");
  } else {
    const auto& track = std::get<TrackingTarget>(*out.target);
    if (track.y_q.mesh() && track.y_q.mesh()->dim() != out.dim) {
      throw Error(ErrorKind::InvalidValue, "y_q is tabulated on a mesh of wrong dimension", "y_q");
    }
  }
  return ValidatedProblem(std::move(out));
}

}  // namespace pocp
