#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pocp/error.hpp"
#include "pocp/problem.hpp"

using namespace pocp;

namespace {

ProblemSpec paper_spec() {
  ProblemSpec ps;
  ps.T = 1.0;
  ps.lambda = 1.0;
  ps.alpha = 1.0;
  ps.c = 1.0;
  ps.target = EndTimeTarget{DataFunction::cos_product(2.0)};
  return ps;
}

ErrorKind kind_of(const ProblemSpec& ps, std::string* field = nullptr) {
  try {
    validate(ps);
  } catch (const Error& e) {
    if (field) *field = e.field();
    return e.kind();
  }
  FAIL("expected validation to fail");
  return ErrorKind::InvalidValue;
}

}  // namespace

TEST_CASE("validate accepts the standard parameter set") {
  const ValidatedProblem vp = validate(paper_spec());
  CHECK(vp.spec().lambda == 1.0);
  CHECK_FALSE(vp.is_tracking());
  CHECK(vp.y0().kind() == DataFunction::Kind::Zero);
}

TEST_CASE("validate rejects bad parameters and names the field") {
  std::string field;
  ProblemSpec ps = paper_spec();
  ps.lambda = 0.0;
  CHECK(kind_of(ps, &field) == ErrorKind::NonPositive);
  CHECK(field == "lambda");

  ps = paper_spec();
  ps.T = -1.0;
  CHECK(kind_of(ps, &field) == ErrorKind::NonPositive);
  CHECK(field == "T");

  ps = paper_spec();
  ps.alpha = -1.0;
  CHECK(kind_of(ps, &field) == ErrorKind::NegativeAlpha);
  CHECK(field == "alpha");

  ps = paper_spec();
  ps.target.reset();
  CHECK(kind_of(ps, &field) == ErrorKind::MissingTarget);
}

TEST_CASE("validate is idempotent") {
  ProblemSpec ps = paper_spec();
  ps.c = -5.0;
  const ValidatedProblem once = validate(ps);
  const ValidatedProblem twice = validate(once.spec());
  CHECK(once == twice);
}

TEST_CASE("catalog data evaluation") {
  const Eigen::Vector2d origin(0.0, 0.0), corner(1.0, 1.0);
  CHECK(eval_data(DataFunction::cos_product(1.0), origin) == doctest::Approx(1.0));
  CHECK(eval_data(DataFunction::cos_product(2.0), corner) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eval_data(DataFunction::zero(), Eigen::Vector2d(0.3, 0.7)) == 0.0);
  CHECK(eval_data(DataFunction::constant(2.5), Eigen::VectorXd::Constant(1, 0.4)) == 2.5);

  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.25);
  const DataFunction decay = DataFunction::cos_product_decay(1.0, 2.0);
  CHECK(eval_data(decay, x, 0.5) == doctest::Approx(std::exp(-1.0) * std::cos(M_PI / 4)));
  CHECK_THROWS_AS(eval_data(decay, x), Error);
}

TEST_CASE("evaluation outside the domain") {
  try {
    eval_data(DataFunction::cos_product(1.0), Eigen::Vector2d(1.5, 0.0));
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfDomain);
  }
}

TEST_CASE("tabulated data reproduces nodal values") {
  auto mesh = std::make_shared<const SpatialMesh>(build_interval_mesh(4));
  Eigen::VectorXd v(5);
  v << 0.3, -1.0, 2.0, 0.125, 7.0;
  const DataFunction f = DataFunction::tabulated(mesh, v);
  for (int k = 0; k < 5; ++k) {
    CHECK(eval_data(f, mesh->coords().col(k)) == v(k));
  }
  CHECK(eval_data(f, Eigen::VectorXd::Constant(1, 0.375)) == doctest::Approx(0.5));

  CHECK_THROWS_AS(DataFunction::tabulated(mesh, Eigen::VectorXd::Zero(3)), Error);
}
