#include <doctest.h>

#include <cmath>

#include "featlab/gegenbauer.hpp"
#include "featlab/quadrature.hpp"

using namespace featlab;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const QuadratureRule rule = gauss_legendre(6);
  CHECK(rule.integrate([](double x) { return std::pow(x, 10); }) == doctest::Approx(2.0 / 11.0).epsilon(1e-13));
  CHECK(rule.integrate([](double x) { return std::pow(x, 11); }) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("Gauss-Jacobi matches Beta integrals") {
  // int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
  const double a = 1.5, b = 0.25;
  const QuadratureRule rule = gauss_jacobi(12, a, b);
  const double exact = std::pow(2.0, a + b + 1.0) * std::exp(std::lgamma(a + 1) + std::lgamma(b + 1) - std::lgamma(a + b + 2));
  CHECK(rule.weights.sum() == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("Gauss-Hermite gives standard normal moments") {
  const QuadratureRule rule = gauss_hermite(20);
  CHECK(rule.integrate([](double z) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rule.integrate([](double z) { return z * z; }) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(rule.integrate([](double z) { return std::pow(z, 4); }) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(rule.integrate([](double z) { return std::pow(z, 6); }) == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("sphere marginal moments") {
  for (int d : {3, 8, 30}) {
    const QuadratureRule rule = sphere_marginal_rule(d, 16);
    CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rule.integrate([](double t) { return t * t; }) == doctest::Approx(1.0 / d).epsilon(1e-12));
    CHECK(rule.integrate([](double t) { return std::pow(t, 4); }) ==
          doctest::Approx(3.0 / (d * (d + 2.0))).epsilon(1e-12));
  }
}

TEST_CASE("split rule handles the relu kink") {
  // E[relu(t)^2] = 1/(2d) and, for d = 3 (uniform t), E[relu(t)] = 1/4.
  for (int d : {3, 9}) {
    const double second = integrate_sphere_marginal_split([](double t) { return t > 0 ? t * t : 0.0; }, d, 8);
    CHECK(second == doctest::Approx(0.5 / d).epsilon(1e-13));
  }
  CHECK(integrate_sphere_marginal_split([](double t) { return t > 0 ? t : 0.0; }, 3, 8) ==
        doctest::Approx(0.25).epsilon(1e-13));
}
