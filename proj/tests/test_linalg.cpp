#include "deepnmf/error.hpp"
#include "deepnmf/linalg.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace deepnmf;

TEST_CASE("project_nonneg clamps negatives") {
  DenseMatrix m(2, 2);
  m << 1, -2, 0, 3;
  DenseMatrix expect(2, 2);
  expect << 1, 0, 0, 3;
  CHECK(project_nonneg(m).mat() == expect);
  CHECK(project_nonneg(DenseMatrix::Zero(2, 2)).mat() == DenseMatrix::Zero(2, 2));
}

TEST_CASE("project_nonneg matches an elementwise scan and is idempotent") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DenseMatrix m = oracle::random_matrix(5, 5, seed);
    const NonnegMatrix p = project_nonneg(m);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j) CHECK(p(i, j) == (m(i, j) > 0 ? m(i, j) : 0.0));
    CHECK(project_nonneg(p.mat()).mat() == p.mat());
  }
}

TEST_CASE("project_nonneg rejects non-finite input") {
  DenseMatrix m = DenseMatrix::Ones(2, 2);
  m(1, 0) = std::nan("");
  CHECK_THROWS_AS(project_nonneg(m), InvalidInput);
  m(1, 0) = INFINITY;
  CHECK_THROWS_AS(project_nonneg(m), InvalidInput);
}

TEST_CASE("NonnegMatrix validates entries") {
  DenseMatrix m = DenseMatrix::Ones(2, 3);
  CHECK_NOTHROW(NonnegMatrix{m});
  m(0, 2) = -1e-300;
  CHECK_THROWS_AS(NonnegMatrix{m}, InvalidInput);
  CHECK(NonnegMatrix::zeros(3, 4).mat().isZero());
}

TEST_CASE("spectral_norm on closed-form cases") {
  CHECK(spectral_norm(DenseMatrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-12));
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 4;
  CHECK(spectral_norm(d) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("spectral_norm agrees with an SVD reference") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const DenseMatrix m = oracle::random_matrix(5, 5, seed);
    CHECK(oracle::rel_diff(spectral_norm(m), oracle::svd_largest(m)) <= 1e-8);
  }
  for (std::uint64_t seed = 100; seed <= 110; ++seed) {
    const DenseMatrix m = oracle::random_matrix(7, 3, seed, 0.0, 2.0);
    CHECK(oracle::rel_diff(spectral_norm(m), oracle::svd_largest(m)) <= 1e-8);
  }
}

TEST_CASE("spectral_norm is transpose- and scale-invariant") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DenseMatrix m = oracle::random_matrix(6, 4, seed);
    const double s = spectral_norm(m, 1e-14);
    CHECK(oracle::rel_diff(s, spectral_norm(m.transpose(), 1e-14)) <= 1e-10);
    for (double c : {-3.5, 0.25, 7.0}) {
      CHECK(oracle::rel_diff(spectral_norm(c * m, 1e-14), std::abs(c) * s) <= 1e-10);
    }
    CHECK(frobenius_sq(m) >= s * s - 1e-8);
  }
}

TEST_CASE("spectral_norm restarts when the ones vector is annihilated") {
  // Rows orthogonal to the all-ones vector: m * ones = 0.
  DenseMatrix m(2, 2);
  m << 1, -1, 2, -2;
  CHECK(spectral_norm(m) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-9));
}

TEST_CASE("spectral_norm edge cases") {
  CHECK(spectral_norm(DenseMatrix::Zero(3, 2)) == 0.0);
  CHECK_THROWS_AS(spectral_norm(DenseMatrix(0, 0)), InvalidInput);
  CHECK_THROWS_AS(spectral_norm(DenseMatrix::Ones(2, 2), 0.0), InvalidInput);
}

TEST_CASE("gram_norm is the squared spectral norm") {
  const DenseMatrix m = oracle::random_matrix(6, 4, 9);
  const double s = oracle::svd_largest(m);
  CHECK(oracle::rel_diff(gram_norm(m), s * s) <= 1e-8);
}

TEST_CASE("ones_gram_norm is the vector length") {
  CHECK(ones_gram_norm(1) == 1.0);
  CHECK(ones_gram_norm(4) == 4.0);
  CHECK(ones_gram_norm(600) == 600.0);
  CHECK_THROWS_AS(ones_gram_norm(0), InvalidInput);
  // Against the materialized all-ones Gram matrix.
  CHECK(oracle::rel_diff(oracle::svd_largest(DenseMatrix::Ones(5, 5)), ones_gram_norm(5)) <= 1e-12);
}

TEST_CASE("frobenius_sq") {
  DenseMatrix m(1, 2);
  m << 3, 4;
  CHECK(frobenius_sq(m) == 25.0);
  CHECK(frobenius_sq(DenseMatrix::Zero(3, 3)) == 0.0);
  const DenseMatrix r = oracle::random_matrix(4, 3, 5);
  CHECK(oracle::rel_diff(frobenius_sq(r), oracle::naive_frobenius_sq(r)) <= 1e-14);
}

TEST_CASE("near_zero_fraction") {
  DenseMatrix m(2, 2);
  m << 0, 1e-7, 1, -2e-7;
  CHECK(near_zero_fraction(m) == 0.75);
  CHECK(near_zero_fraction(m, 1e-8) == 0.25);
}
