#include <doctest.h>

#include <cmath>

#include "featlab/errors.hpp"
#include "featlab/gegenbauer.hpp"
#include "featlab/quadrature.hpp"

using namespace featlab;

namespace {

// Binomial coefficient in long double, used for B(d,k) = C(k+d-1, d-1) - C(k+d-3, d-1).
long double binom(int n, int k) {
  if (k < 0 || n < k) return 0.0L;
  long double out = 1.0L;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

}  // namespace

TEST_CASE("low-degree Gegenbauer polynomials match explicit forms") {
  for (int d : {3, 5, 12}) {
    for (double t : {-0.9, -0.3, 0.0, 0.41, 1.0}) {
      CHECK(gegenbauer(d, 0, t) == 1.0);
      CHECK(gegenbauer(d, 1, t) == doctest::Approx(t));
      CHECK(gegenbauer(d, 2, t) == doctest::Approx((d * t * t - 1.0) / (d - 1.0)).epsilon(1e-14));
      CHECK(gegenbauer(d, 3, t) == doctest::Approx(((d + 2.0) * t * t * t - 3.0 * t) / (d - 1.0)).epsilon(1e-14));
    }
  }
  // d = 3 gives the Legendre polynomials.
  CHECK(gegenbauer(3, 4, 0.3) == doctest::Approx((35 * std::pow(0.3, 4) - 30 * 0.09 + 3) / 8).epsilon(1e-14));
}

TEST_CASE("gegenbauer_all agrees with single evaluations") {
  double out[11];
  gegenbauer_all(7, 10, 0.37, out);
  for (int k = 0; k <= 10; ++k) CHECK(out[k] == doctest::Approx(gegenbauer(7, k, 0.37)).epsilon(1e-15));
}

TEST_CASE("harmonic dimensions") {
  for (int k = 0; k < 10; ++k) CHECK(harmonic_dimension(3, k) == static_cast<std::uint64_t>(2 * k + 1));
  CHECK(harmonic_dimension(2, 0) == 1u);
  CHECK(harmonic_dimension(2, 5) == 2u);
  for (int d : {4, 9, 25}) {
    CHECK(harmonic_dimension(d, 1) == static_cast<std::uint64_t>(d));
    CHECK(harmonic_dimension(d, 2) == static_cast<std::uint64_t>(d * (d + 1) / 2 - 1));
    for (int k = 0; k <= 12; ++k) {
      const long double oracle = binom(k + d - 1, d - 1) - binom(k + d - 3, d - 1);
      CHECK(static_cast<long double>(harmonic_dimension(d, k)) == oracle);
      CHECK(log_harmonic_dimension(d, k) == doctest::Approx(std::log(static_cast<double>(oracle))).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(harmonic_dimension(500, 400), std::overflow_error);
  CHECK(std::isfinite(log_harmonic_dimension(500, 400)));
}

TEST_CASE("G_k(0) closed form") {
  for (int d : {4, 11}) {
    for (int k = 0; k <= 9; ++k) CHECK(gegenbauer_at_zero(d, k) == doctest::Approx(gegenbauer(d, k, 0.0)).epsilon(1e-13));
  }
}

TEST_CASE("orthogonality in L2(mu_d)") {
  for (int d : {4, 10, 25}) {
    const GegenbauerBasis basis(d, 8);
    const QuadratureRule rule = sphere_marginal_rule(d, 20);
    for (int j = 0; j <= 8; ++j) {
      for (int k = 0; k <= 8; ++k) {
        const double value = rule.integrate([&](double t) { return basis.eval(j, t) * basis.eval(k, t); });
        CHECK(std::abs(value - (j == k ? 1.0 / basis.harmonic_dim(k) : 0.0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("basis checks its domain") {
  const GegenbauerBasis basis(6, 4);
  CHECK_THROWS_AS(basis.eval(2, 1.5), DomainError);
  CHECK_THROWS_AS(basis.eval(5, 0.5), std::out_of_range);
  CHECK_THROWS_AS(GegenbauerBasis(1, 4), InvalidDimension);
  CHECK(basis.chi(2) == doctest::Approx(6.0 / 8.0));
}

TEST_CASE("relu inner products for d = 3") {
  // mu_3 is uniform on [-1, 1]: E[relu] = 1/4, E[relu G_2] = 1/16, E[relu G_4] = -1/96.
  CHECK(relu_inner_product(3, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(relu_inner_product(3, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(relu_inner_product(3, 2) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
  CHECK(relu_inner_product(3, 3) == 0.0);
  CHECK(relu_inner_product(3, 4) == doctest::Approx(-1.0 / 96.0).epsilon(1e-13));
}

TEST_CASE("relu coefficients agree with quadrature; the G_1 entry is 1/2") {
  for (int d : {6, 12}) {
    const GegenbauerBasis basis(d, 10);
    const ReluGegenbauer coef = relu_geg_coefficients(basis, 8);
    CHECK(coef.max_even_rel_gap < 1e-10);
    CHECK(coef.max_odd_abs < 1e-12);
    CHECK(coef.quadrature[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(coef.coefficients[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(coef.closed_form[1] == doctest::Approx(0.5 / d));
    CHECK(coef.g1_mismatch == doctest::Approx(0.5 - 0.5 / d).epsilon(1e-10));
  }
}

TEST_CASE("relu tail norm matches Parseval") {
  for (int d : {8, 16, 40}) {
    const double c0 = relu_inner_product(d, 0);
    const double tail = 0.5 / d - c0 * c0 - 0.25 / d;
    CHECK(relu_tail_norm(d, 1) == doctest::Approx(tail).epsilon(1e-9));
    const GegenbauerBasis basis(d, 16);
    CHECK(relu_tail_norm(basis, 1) <= relu_tail_norm(d, 1));
  }
}

TEST_CASE("tail norm lower bound") {
  for (int d : {16, 32, 64, 128}) {
    for (int m = 1; m <= d / 8; ++m) CHECK(relu_tail_norm(d, m) >= 1.0 / (512.0 * m * m * d));
  }
}

TEST_CASE("lambda_k closed forms agree with quadrature") {
  const Activation relu = Activation::relu();
  const Activation id = Activation::identity();
  for (int d : {5, 16}) {
    CHECK(lambda_k(d, id, 1) == doctest::Approx(1.0 / std::sqrt(d)).epsilon(1e-14));
    CHECK(lambda_k(d, id, 2) == 0.0);
    for (int k = 0; k <= 6; ++k) {
      CHECK(std::abs(lambda_k(d, relu, k) - lambda_k_quadrature(d, relu, k)) < 1e-11);
    }
  }
  const Activation cubic = Activation::custom("cubic", [](double z) { return z * z * z; });
  // z^3 on the sqrt(d)-sphere: lambda_1 = d^{3/2} E[t^4] = 3 sqrt(d)/(d+2).
  CHECK(lambda_k(9, cubic, 1) == doctest::Approx(3.0 * 3.0 / 11.0).epsilon(1e-10));
  const Vector table = lambda_table(9, cubic, 5);
  CHECK(table[1] == doctest::Approx(9.0 / 11.0).epsilon(1e-10));
  CHECK(std::abs(table[2]) < 1e-12);
}
