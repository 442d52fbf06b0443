#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "../oracle/dense_oracle.hpp"
#include "helpers.hpp"
#include "pocp/error.hpp"
#include "pocp/saddle.hpp"

using namespace pocp;

namespace {

oracle::Blocks oracle_blocks(int n_elems, int N, double alpha, double c) {
  const Eigen::MatrixXd M = oracle::mass_1d(n_elems);
  return oracle::blocks(M, alpha * oracle::laplace_1d(n_elems) + c * M,
                        std::vector<double>(static_cast<std::size_t>(N), 1.0 / N));
}

// [E + G, -K^T D, 0; -D K, (1+l) D Mcal, 0; 0, 0, S3], G = K^T D Mcal^{-1} K.
Eigen::MatrixXd oracle_preconditioner(const oracle::Blocks& b, double lambda, SaddleVariant v) {
  const int m = static_cast<int>(b.K.rows());
  const Eigen::MatrixXd G = b.K.transpose() * b.D * b.Mcal.inverse() * b.K;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(3 * m, 3 * m);
  P.block(0, 0, m, m) = b.E + G;
  P.block(0, m, m, m) = -b.K.transpose() * b.D;
  P.block(m, 0, m, m) = -b.D * b.K;
  P.block(m, m, m, m) = (1 + lambda) * b.D * b.Mcal;
  P.block(2 * m, 2 * m, m, m) = v == SaddleVariant::Sym ? Eigen::MatrixXd(b.D * b.Mcal) : Eigen::MatrixXd(b.D.inverse() * b.Mcal);
  return P;
}

}  // namespace

TEST_CASE("saddle operators match the dense block definitions") {
  const double lambda = 0.8;
  auto sys = testutil::block_system(3, 3, 1.0, 1.0);
  const oracle::Blocks ob = oracle_blocks(3, 3, 1.0, 1.0);
  const SaddleSystem sym(sys, lambda, SaddleVariant::Sym), disc(sys, lambda, SaddleVariant::Disc);
  CHECK(sym.size() == 36);
  CHECK((sym.dense() - oracle::kkt_sym(ob, lambda)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((disc.dense() - oracle::kkt_disc(ob, lambda)).cwiseAbs().maxCoeff() <= 1e-12);

  for (const SaddleSystem* s : {&sym, &disc}) {
    const Eigen::VectorXd x = testutil::random_vector(36, 70), z = testutil::random_vector(36, 71);
    const double a = s->apply(x).dot(z), b = x.dot(s->apply(z));
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
  }

  // Row 2 of Sym on (0, u, 0).
  Eigen::VectorXd x = Eigen::VectorXd::Zero(36);
  x.segment(12, 12) = testutil::random_vector(12, 72);
  const Eigen::VectorXd row2 = sym.apply(x).segment(12, 12);
  CHECK((row2 - lambda * ob.D * ob.Mcal * x.segment(12, 12)).norm() <= 1e-14);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(ob.E);
  CHECK(lu.rank() == 4);
}

TEST_CASE("roles reproduce the preconditioner blocks") {
  auto sys = testutil::block_system(3, 3, 1.0, -1.0);
  const oracle::Blocks ob = oracle_blocks(3, 3, 1.0, -1.0);
  const Eigen::MatrixXd G = ob.K.transpose() * ob.D * ob.Mcal.inverse() * ob.K;
  for (SaddleVariant v : {SaddleVariant::Sym, SaddleVariant::Disc}) {
    const SaddleRoles r = SaddleSystem(sys, 1.0, v).dense_roles();
    const Eigen::MatrixXd S = r.B2 * r.A2.inverse() * r.B2.transpose();
    const Eigen::MatrixXd Sref = v == SaddleVariant::Sym ? Eigen::MatrixXd(ob.D * ob.Mcal) : Eigen::MatrixXd(ob.D.inverse() * ob.Mcal);
    CHECK((S - Sref).norm() <= 1e-12 * Sref.norm());
    const Eigen::MatrixXd Gr = r.B1.transpose() * r.B2.transpose().inverse() * r.A2 * r.B2.inverse() * r.B1;
    CHECK((Gr - G).norm() <= 1e-12 * G.norm());
  }
}

TEST_CASE("saddle right-hand sides") {
  const DiscreteProblem dp = testutil::problem(4, 5, 1.0, 1.0, 1.0, DataFunction::cos_product(1.0),
                                               DataFunction::cos_product(2.0));
  const SaddleSystem sym(dp.system, 1.0, SaddleVariant::Sym), disc(dp.system, 1.0, SaddleVariant::Disc);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  CHECK(saddle_rhs(sym, zero, zero).norm() == 0.0);

  const Eigen::VectorXd bs = saddle_rhs(sym, dp.y0_load, dp.y_omega_load);
  const Eigen::VectorXd bd = saddle_rhs(disc, dp.y0_load, dp.y_omega_load);
  BlockVector third(5, 5);
  third.flat() = bd.tail(25);
  CHECK((bs.tail(25) - dp.system->apply_D(third).flat()).norm() <= 1e-15);
}

TEST_CASE("both variants give the same control") {
  const DiscreteProblem dp = testutil::problem(3, 4, 0.5, 1.0, 1.0, DataFunction::cos_product(1.0),
                                               DataFunction::cos_product(2.0));
  const SaddleSystem sym(dp.system, 0.5, SaddleVariant::Sym), disc(dp.system, 0.5, SaddleVariant::Disc);
  const Eigen::VectorXd xs = sym.dense().partialPivLu().solve(saddle_rhs(sym, dp.y0_load, dp.y_omega_load));
  const Eigen::VectorXd xd = disc.dense().partialPivLu().solve(saddle_rhs(disc, dp.y0_load, dp.y_omega_load));
  BlockVector ys, us, ps, yd, ud, pd;
  sym.unpack(xs, ys, us, ps);
  disc.unpack(xd, yd, ud, pd);
  CHECK((us.flat() - ud.flat()).norm() <= 1e-12 * us.flat().norm());
  CHECK((ps.flat() - pd.flat()).norm() <= 1e-12 * ps.flat().norm());
  CHECK((sym.pack(ys, us, ps) - xs).norm() <= 1e-14 * xs.norm());

  // The dense KKT solution is the reduced optimum.
  const ControlSolution red = solve_reduced(dp, 1e-13);
  const BlockVector diff = us - red.u;
  CHECK(std::sqrt(dp.system->inner_DM(diff, diff)) <= 1e-8 * std::sqrt(dp.system->inner_DM(us, us)));
}

TEST_CASE("preconditioner") {
  const double lambda = 1.0;
  auto sys = testutil::block_system(3, 3, 1.0, 1.0);
  const oracle::Blocks ob = oracle_blocks(3, 3, 1.0, 1.0);
  for (SaddleVariant v : {SaddleVariant::Sym, SaddleVariant::Disc}) {
    const SaddleSystem s(sys, lambda, v);
    const SaddlePreconditioner P(s, WMode::ExactW);
    const Eigen::MatrixXd ref = oracle_preconditioner(ob, lambda, v);
    CHECK((P.dense() - ref).norm() <= 1e-11 * ref.norm());

    CHECK(apply_precond_inverse(P, Eigen::VectorXd::Zero(36)).norm() == 0.0);
    const Eigen::VectorXd r = testutil::random_vector(36, 80);
    CHECK((P.apply_inverse(P.apply(r)) - r).norm() <= 1e-10 * r.norm());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (ref + ref.transpose()));
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    for (unsigned k = 0; k < 100; ++k) {
      const Eigen::VectorXd q = testutil::random_vector(36, 100 + k);
      CHECK(q.dot(P.apply_inverse(q)) > 0.0);
    }

    // Approximate W drops E from the (1,1) block.
    const SaddlePreconditioner Pa(s, WMode::ApproxW);
    Eigen::MatrixXd refa = ref;
    refa.block(0, 0, 12, 12) -= ob.E;
    CHECK((Pa.dense() - refa).norm() <= 1e-11 * refa.norm());
    CHECK((Pa.apply_inverse(Pa.apply(r)) - r).norm() <= 1e-9 * r.norm());
  }
}

TEST_CASE("W = K^T D F_W Mcal^{-1} K with the reduced operator at weight lambda/(1+lambda)") {
  const double lambda = 2.0, mu = lambda / (1 + lambda);
  const oracle::Blocks ob = oracle_blocks(3, 3, 1.0, 0.5);
  const Eigen::MatrixXd W = ob.E + mu * ob.K.transpose() * ob.D * ob.Mcal.inverse() * ob.K;

  const DiscreteProblem dp = testutil::problem(3, 3, mu, 1.0, 0.5);
  const ReducedOperator op = make_reduced_operator(dp);
  Eigen::MatrixXd F(12, 12);
  for (int j = 0; j < 12; ++j) {
    BlockVector e(4, 3);
    e.flat()(j) = 1.0;
    F.col(j) = op.apply(e).flat();
  }
  const Eigen::MatrixXd Wf = ob.K.transpose() * ob.D * F * ob.Mcal.inverse() * ob.K;
  CHECK((Wf - W).norm() <= 1e-11 * W.norm());
}

TEST_CASE("MINRES with exact W terminates in at most n_x + 2 steps") {
  const DiscreteProblem dp = testutil::problem(4, 4, 1.0, 1.0, 1.0, DataFunction::cos_product(1.0),
                                               DataFunction::cos_product(2.0));
  for (SaddleVariant v : {SaddleVariant::Sym, SaddleVariant::Disc}) {
    const SaddleSystem s(dp.system, 1.0, v);
    const SaddlePreconditioner P(s, WMode::ExactW);
    const SaddleSolve sol = minres_solve(s, P, saddle_rhs(s, dp.y0_load, dp.y_omega_load), 1e-12);
    CHECK(sol.report.converged);
    CHECK(sol.report.iterations <= 5 + 2);
    CHECK(sol.precond_true_residual <= 1e-12);
  }
}

TEST_CASE("all-at-once and reduced controls agree") {
  const DiscreteProblem dp = testutil::problem(15, 20, 1e-2, 1.0, -1.0, DataFunction::cos_product(1.0),
                                               DataFunction::cos_product(2.0));
  const ControlSolution red = solve_reduced(dp, 1e-12);
  for (SaddleVariant v : {SaddleVariant::Sym, SaddleVariant::Disc}) {
    for (WMode w : {WMode::ExactW, WMode::ApproxW}) {
      const AllAtOnceSolution a = solve_all_at_once(dp, w, v, 1e-10);
      CHECK(a.solution.report.converged);
      const BlockVector d = a.solution.u - red.u;
      CHECK(std::sqrt(dp.system->inner_DM(d, d)) <= 1e-6 * std::sqrt(dp.system->inner_DM(red.u, red.u)));
      CHECK(a.solution.residuals.gradient <= 1e-8);
      CHECK(a.solution.residuals.state <= 1e-8);
      CHECK(a.solution.residuals.adjoint <= 1e-8);
    }
  }
}

TEST_CASE("zero data gives the zero solution without iterations") {
  const DiscreteProblem dp = testutil::problem(8, 6, 1.0, 1.0, 1.0);
  const AllAtOnceSolution a = solve_all_at_once(dp);
  CHECK(a.solution.report.iterations == 0);
  CHECK(a.solution.report.converged);
  CHECK(a.solution.u.flat().norm() == 0.0);
}

TEST_CASE("all-at-once rejects tracking targets and oversized exact W") {
  ProblemSpec ps;
  ps.target = TrackingTarget{DataFunction::zero()};
  const DiscreteProblem tr = discretize(validate(ps), testutil::interval(4), build_time_grid(1.0, 3));
  CHECK_THROWS_AS(solve_all_at_once(tr), Error);

  const DiscreteProblem dp = testutil::problem(20, 10, 1.0, 1.0, 1.0);
  const SaddleSystem s(dp.system, 1.0, SaddleVariant::Sym);
  try {
    SaddlePreconditioner P(s, WMode::ExactW, 100);
    FAIL("expected TooLargeForDense");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooLargeForDense);
  }
}
