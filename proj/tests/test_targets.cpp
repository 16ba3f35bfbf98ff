#include <doctest.h>

#include <cmath>

#include "featlab/errors.hpp"
#include "featlab/sampling.hpp"
#include "featlab/targets.hpp"

using namespace featlab;

TEST_CASE("normalize_quadratic") {
  CHECK_THROWS_AS(normalize_quadratic(Matrix::Identity(5, 5)), DegenerateTarget);
  Matrix raw(2, 2);
  raw << 1, 0, 0, -1;
  const Matrix A = normalize_quadratic(raw);
  CHECK(A(0, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(A(1, 1) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-14));

  const int d = 10;
  const Matrix B = normalize_quadratic(random_symmetric_traceless(d, SymmetricKind::gauss_sym, Seed{1, 0}));
  CHECK(std::abs(B.trace()) < 1e-10);
  CHECK(B.squaredNorm() == doctest::Approx((d + 2.0) / (2.0 * d)).epsilon(1e-10));
  const Matrix C = normalize_quadratic(random_symmetric_traceless(d, SymmetricKind::projection_half, Seed{1, 0}),
                                       Normalization::appendix_a);
  CHECK(C.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("theory normalization gives a unit second moment") {
  const int d = 12, n = 1 << 16;
  const Matrix A = normalize_quadratic(random_symmetric_traceless(d, SymmetricKind::gauss_sym, Seed{2, 0}));
  const Vector q = quadratic_form(A, sample_sphere(d, std::sqrt(12.0), n, Seed{2, 1}));
  const Vector sq = q.array().square();
  const double mean = sq.mean();
  const double se = std::sqrt((sq.array() - mean).square().sum() / (n - 1.0) / n);
  CHECK(std::abs(mean - 1.0) <= 3.0 * se);
}

TEST_CASE("separation target") {
  CHECK_THROWS_AS(make_separation_target(7, Seed{}), InvalidDimension);
  const TargetSpec plain = make_separation_target(4, Seed{3, 0}, false, 1 << 12);
  Vector x(4);
  x << 0.3, -1.2, 0.7, 1.5;
  const double expected = 2.0 / std::sqrt(4.0) * (0.3 * 0.7 + -1.2 * 1.5);
  CHECK(quadratic_form(plain.A, x.transpose())[0] == doctest::Approx(expected).epsilon(1e-14));

  const int d = 16;
  const TargetSpec spec = make_separation_target(d, Seed{3, 1});
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spec.A);
  for (int i = 0; i < d; ++i) {
    CHECK(std::abs(std::abs(eig.eigenvalues()[i]) - 1.0 / std::sqrt(d)) < 1e-9);
  }
  CHECK(eig.eigenvalues().head(d / 2).maxCoeff() < 0.0);
  CHECK(spec.A.squaredNorm() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(spec.c0_provenance.estimated);
  CHECK(spec.c0_provenance.n_mc == kDefaultMonteCarlo);

  const int n = 1 << 16;
  const Vector f = eval_target(spec, sample_sphere(d, 4.0, n, Seed{3, 2}));
  const double se = std::sqrt((f.array() - f.mean()).square().sum() / (n - 1.0) / n);
  CHECK(std::abs(f.mean()) <= 3.0 * se);
}

TEST_CASE("target and feature evaluation") {
  Vector w = Vector::Zero(3);
  w[0] = 2.0;
  const TargetSpec single = make_single_index(w, Link::identity());
  CHECK(single.w_star.norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Matrix x = sample_gaussian(3, 5, Seed{4, 0});
  CHECK((eval_target(single, x) - x.col(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((eval_feature(single, x) - x.col(0)).cwiseAbs().maxCoeff() == 0.0);

  const Matrix A = normalize_quadratic(random_symmetric_traceless(3, SymmetricKind::gauss_sym, Seed{4, 1}));
  const TargetSpec cube = make_quadratic(A, Link::cube(), false, Seed{});
  const Vector h = quadratic_form(A, x);
  CHECK((eval_feature(cube, x) - h).cwiseAbs().maxCoeff() == 0.0);
  CHECK((eval_target(cube, x) - h.array().cube().matrix()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("link derivative means") {
  CHECK(link_derivative_mean(Link::identity()) == 1.0);
  CHECK(link_derivative_mean(Link::cube()) == doctest::Approx(3.0));
  CHECK(link_derivative_mean(Link::relu()) == doctest::Approx(0.5));
  const double sigmoid = link_derivative_mean(Link::sigmoid());
  // Independent check: trapezoid rule on a wide grid.
  double trap = 0.0;
  const double h = 1e-3;
  for (double z = -12.0; z <= 12.0; z += h) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    trap += h * s * (1.0 - s) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  }
  CHECK(sigmoid == doctest::Approx(trap).epsilon(1e-8));
  const Link custom = Link::custom("sq", [](double z) { return z * z; }, [](double z) { return 2.0 * z; });
  CHECK(std::abs(link_derivative_mean(custom)) < 1e-12);
}

TEST_CASE("incoherence from eigensolver and power iteration") {
  const Matrix A = normalize_quadratic(random_symmetric_traceless(20, SymmetricKind::gauss_sym, Seed{5, 0}));
  CHECK(incoherence(A) == doctest::Approx(operator_norm_power(A) * std::sqrt(20.0)).epsilon(1e-8));
  const TargetSpec sep = make_separation_target(8, Seed{5, 1}, true, 1 << 10);
  CHECK(incoherence(sep.A) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("kind and normalization names round-trip") {
  for (TargetKind k : {TargetKind::single_index, TargetKind::quadratic, TargetKind::separation}) {
    CHECK(parse_target_kind(to_string(k)) == k);
  }
  CHECK(parse_normalization("appendix_a") == Normalization::appendix_a);
  CHECK(parse_normalization(to_string(Normalization::theory)) == Normalization::theory);
}
