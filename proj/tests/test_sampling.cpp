#include <doctest.h>

#include <cmath>

#include "featlab/errors.hpp"
#include "featlab/sampling.hpp"

using namespace featlab;

TEST_CASE("sphere samples lie on the requested sphere") {
  const Matrix x = sample_sphere(7, std::sqrt(7.0), 500, Seed{1, 0});
  CHECK(x.rows() == 500);
  CHECK(x.cols() == 7);
  CHECK((x.rowwise().norm().array() - std::sqrt(7.0)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("sphere second moment is the identity") {
  const int d = 5, n = 1 << 16;
  const Matrix x = sample_sphere(d, std::sqrt(5.0), n, Seed{2, 0});
  const Matrix cov = x.transpose() * x / n;
  // Entries of x x^T have variance at most E[x_i^2 x_j^2] <= 3 (Gaussian-like tails).
  CHECK((cov - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 5.0 * std::sqrt(3.0 / n));
}

TEST_CASE("seeds and streams are reproducible and distinct") {
  const Matrix a = sample_gaussian(3, 10, Seed{9, 1});
  const Matrix b = sample_gaussian(3, 10, Seed{9, 1});
  const Matrix c = sample_gaussian(3, 10, Seed{9, 2});
  const Matrix e = sample_gaussian(3, 10, Seed{10, 1});
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a != e);
}

TEST_CASE("datasets drawn with more points extend the smaller draw") {
  const Matrix small = sample_sphere(4, 2.0, 16, Seed{3, 4});
  const Matrix large = sample_sphere(4, 2.0, 64, Seed{3, 4});
  CHECK(large.topRows(16) == small);
}

TEST_CASE("sample_sphere rejects d < 2") {
  CHECK_THROWS_AS(sample_sphere(1, 1.0, 3, Seed{}), InvalidDimension);
}

TEST_CASE("initial network state") {
  const NetworkState theta = sample_init(6, 40, 30, Seed{5, 0});
  CHECK(theta.stage == Stage::init);
  CHECK(theta.W.rows() == 40);
  CHECK(theta.W.cols() == 30);
  CHECK(theta.W.isZero(0.0));
  CHECK((theta.a.array().abs() == 1.0).all());
  CHECK((theta.V.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(theta.input_dim() == 6);
  CHECK(theta.outer_width() == 40);
  CHECK(theta.inner_width() == 30);
}

TEST_CASE("random orthogonal matrices are orthogonal") {
  const Matrix Q = random_orthogonal(9, Seed{6, 0});
  CHECK((Q.transpose() * Q - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("random symmetric matrices") {
  const Matrix G = random_symmetric_traceless(8, SymmetricKind::gauss_sym, Seed{7, 0});
  CHECK(G == G.transpose());
  const Matrix P = random_symmetric_traceless(8, SymmetricKind::projection_half, Seed{7, 0});
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(P.trace() - 4.0) < 1e-12);
  CHECK_THROWS_AS(random_symmetric_traceless(7, SymmetricKind::projection_half, Seed{}), InvalidDimension);
}
