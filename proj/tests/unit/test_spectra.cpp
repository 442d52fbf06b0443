#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "../oracle/dense_oracle.hpp"
#include "../oracle/generic_instance.hpp"
#include "helpers.hpp"
#include "pocp/error.hpp"
#include "pocp/spectra.hpp"

using namespace pocp;

namespace {

const ClaimCheck& find(const std::vector<ClaimCheck>& checks, const std::string& name) {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  return checks.front();
}

}  // namespace

TEST_CASE("clustering") {
  const auto c = cluster_eigenvalues({1.0, 1.0 + 1e-9, 1.5, 2.0, 2.0 + 5e-9, 2.0 + 9e-9}, 1e-8);
  REQUIRE(c.size() == 3);
  CHECK(c[0].multiplicity == 2);
  CHECK(c[1].multiplicity == 1);
  CHECK(c[2].multiplicity == 3);
  CHECK(c[2].tolerance == 1e-8);
}

TEST_CASE("integrator spectrum is {lambda, lambda + T}") {
  const DiscreteProblem dp = testutil::problem(4, 6, 1.0, 0.0, 0.0);
  const SpectrumReport rep = dense_reduced_spectrum(make_reduced_operator(dp));
  const int m = 30, nx = 5;
  CHECK(rep.eigenvalues.size() == static_cast<std::size_t>(m));
  CHECK(rep.count_near(1.0) == m - nx);
  CHECK(rep.count_near(2.0) == nx);
  int total = 0;
  for (const auto& c : rep.clusters) total += c.multiplicity;
  CHECK(total == m);

  const auto checks = verify_spectral_claims(rep, 1.0, gamma_bound(0.0, 1.0), nx, m);
  for (const auto& c : checks) CHECK_MESSAGE(c.passed, c.name);

  CHECK(max_eig_reduced(make_reduced_operator(dp)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dense and Lanczos extreme eigenvalues agree") {
  for (double c : {1.0, -1.0, 10.0}) {
    const DiscreteProblem dp = testutil::problem(7, 20, 1.0, 1.0, c);
    const ReducedOperator op = make_reduced_operator(dp);
    const double dense = dense_reduced_spectrum(op).eigenvalues.back();
    const LanczosResult l = lanczos_max_eig(op);
    CHECK(std::abs(l.value - dense) <= 1e-9 * dense);
    CHECK(std::abs(dense - oracle::scalar_mode_max_eig(1.0, c, 1.0, 20)) <= 1e-10 * dense);
  }
}

TEST_CASE("c = 1 instance satisfies the inclusion with gamma = 1") {
  const DiscreteProblem dp = testutil::problem(9, 8, 1.0, 1.0, 1.0);
  const SpectrumReport rep = dense_reduced_spectrum(make_reduced_operator(dp));
  CHECK(rep.eigenvalues.back() <= 2.0);
  const auto checks = verify_spectral_claims(rep, 1.0, gamma_bound(1.0, 1.0), 10, 80);
  CHECK(find(checks, "eigenvalue_inclusion").passed);
  CHECK(find(checks, "count_above_lambda").passed);
}

TEST_CASE("fabricated report with too many eigenvalues above lambda fails check (b)") {
  const int nx = 3, m = 12;
  SpectrumReport rep;
  rep.kind = SpectrumKind::Reduced;
  for (int i = 0; i < nx - 1; ++i) rep.eigenvalues.push_back(1.0);
  for (int i = 0; i < m - nx + 1; ++i) rep.eigenvalues.push_back(1.5);
  rep.clusters = cluster_eigenvalues(rep.eigenvalues);
  const auto checks = verify_spectral_claims(rep, 1.0, 1.0, nx, m);
  CHECK(find(checks, "eigenvalue_inclusion").passed);
  CHECK_FALSE(find(checks, "count_above_lambda").passed);

  rep.eigenvalues.back() = 2.5;
  CHECK_FALSE(find(verify_spectral_claims(rep, 1.0, 1.0, nx, m), "eigenvalue_inclusion").passed);
}

TEST_CASE("preconditioned saddle spectrum at N = 4, n_x = 5") {
  const DiscreteProblem dp = testutil::problem(4, 4, 1.0, 1.0, 1.0);
  for (SaddleVariant v : {SaddleVariant::Sym, SaddleVariant::Disc}) {
    const SaddleSystem sys(dp.system, 1.0, v);
    const SpectrumReport rep = precond_saddle_spectrum(sys, SaddlePreconditioner(sys, WMode::ExactW));
    CHECK(rep.count_near(1.0) == 40);
    CHECK(rep.count_near(-1.0) == 15);
    for (const auto& c : verify_spectral_claims(rep, 1.0, 0.0, 5, 20)) CHECK_MESSAGE(c.passed, c.name);

    const SaddlePreconditioner approx(sys, WMode::ApproxW);
    try {
      precond_saddle_spectrum(sys, approx);
      FAIL("expected NotExactW");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotExactW);
    }
  }
}

TEST_CASE("generic instances") {
  std::mt19937_64 gen(7);
  SUBCASE("A1 definite: no eigenvalue -1") {
    const SaddleRoles r = oracle::generic_instance(5, 3, 0, gen);
    const SpectrumReport rep = generic_saddle_spectrum(r, 1.0);
    CHECK(rep.count_near(-1.0) == 0);
    CHECK(rep.count_near(1.0) == 8);
  }
  SUBCASE("n = 6, m = 4, r = 2") {
    const SaddleRoles r = oracle::generic_instance(6, 4, 2, gen);
    for (double lambda : {0.1, 1.0, 10.0}) {
      const SpectrumReport rep = generic_saddle_spectrum(r, lambda);
      const auto checks = verify_saddle_multiplicities(rep, lambda, 10, 2, 2);
      for (const auto& c : checks) CHECK_MESSAGE(c.passed, c.name);
    }
  }
}

TEST_CASE("dense limits") {
  const DiscreteProblem dp = testutil::problem(10, 10, 1.0, 1.0, 1.0);
  try {
    dense_reduced_spectrum(make_reduced_operator(dp), 50);
    FAIL("expected TooLargeForDense");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooLargeForDense);
  }
}

TEST_CASE("eigenvalue CSV") {
  const DiscreteProblem dp = testutil::problem(2, 2, 1.0, 0.0, 0.0);
  const SpectrumReport rep = dense_reduced_spectrum(make_reduced_operator(dp));
  std::ostringstream out;
  write_eigenvalues_csv(out, rep);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "index,value,cluster");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  CHECK(out.str().find("5,2,1") != std::string::npos);
}
