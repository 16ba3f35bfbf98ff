#pragma once

#include <cmath>
#include <string>

#include "featlab/errors.hpp"
#include "featlab/types.hpp"

namespace featlab {

struct QuadratureRule {
  Vector nodes;
  Vector weights;

  template <typename F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// n-point Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta
/// (Golub-Welsch). alpha, beta > -1.
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

QuadratureRule gauss_legendre(int n);

/// Probabilists' Gauss-Hermite rule: weights sum to one, so integrate() returns E[f(z)], z ~ N(0,1).
QuadratureRule gauss_hermite(int n);

/// Gauss rule for the marginal law mu_d of x.e1 on the unit sphere in R^d, i.e. the density
/// Z_d (1-t^2)^((d-3)/2) on [-1, 1]. Weights sum to one; exact for polynomials of degree <= 2n-1.
QuadratureRule sphere_marginal_rule(int d, int n);

/// E_{t ~ mu_d}[f(t)] with the interval split at 0, each half integrated by Gauss-Jacobi against
/// its endpoint singularity. Accurate for integrands with a kink at the origin (ReLU).
template <typename F>
double integrate_sphere_marginal_split(F&& f, int d, int n);

/// Repeats `estimate(n)` with doubling n until the change drops below rtol (relative) or atol.
template <typename Estimate>
double converge_by_doubling(Estimate&& estimate, int n0, double rtol, int n_max,
                            const std::string& what, double atol = 0.0) {
  double coarse = estimate(n0);
  for (int n = 2 * n0; n <= n_max; n *= 2) {
    const double fine = estimate(n);
    const double scale = std::max({std::abs(fine), std::abs(coarse), 1e-300});
    if (std::abs(fine - coarse) <= std::max(rtol * scale, atol) || std::abs(fine - coarse) < 1e-300) return fine;
    coarse = fine;
    if (2 * n > n_max) throw QuadratureError(what + ": no convergence under node doubling", coarse, fine);
  }
  throw QuadratureError(what + ": node budget too small", coarse, coarse);
}

double log_sphere_marginal_norm(int d);

/// Jacobi rule with alpha = (d-3)/2 and beta = 0, cached by (d, n). Used for half-interval integrals.
const QuadratureRule& half_interval_rule(int d, int n);

template <typename F>
double integrate_sphere_marginal_split(F&& f, int d, int n) {
  const double a = 0.5 * (d - 3);
  const QuadratureRule& rule = half_interval_rule(d, n);
  // On [0,1]: t = (1+s)/2 maps the Jacobi variable s in [-1,1]; 1 - t = (1-s)/2.
  double positive = 0.0;
  double negative = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double t = 0.5 * (1.0 + rule.nodes[i]);
    const double smooth = std::pow(1.0 + t, a);
    positive += rule.weights[i] * smooth * f(t);
    negative += rule.weights[i] * smooth * f(-t);
  }
  const double scale = std::exp(log_sphere_marginal_norm(d) - (a + 1.0) * std::log(2.0));
  return scale * (positive + negative);
}

}  // namespace featlab
