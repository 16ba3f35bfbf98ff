#include "featlab/quadrature.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace featlab {

namespace {

QuadratureRule golub_welsch(const Vector& diag, const Vector& offdiag, double mu0) {
  const Eigen::Index n = diag.size();
  QuadratureRule rule;
  if (n == 1) {
    rule.nodes = diag;
    rule.weights = Vector::Constant(1, mu0);
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Golub-Welsch eigensolve failed");
  rule.nodes = solver.eigenvalues();
  rule.weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi needs n >= 1");
  if (!(alpha > -1.0) || !(beta > -1.0)) throw std::invalid_argument("gauss_jacobi needs alpha, beta > -1");
  const double ab = alpha + beta;
  Vector diag(n);
  Vector off(std::max(n - 1, 0));
  diag[0] = (beta - alpha) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    diag[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    double b2 = 0.0;
    if (k == 1) {
      // (k + alpha + beta) / (s - 1) cancels to 1 at k = 1.
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((s * s) * (s + 1.0));
    } else {
      b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    off[k - 1] = std::sqrt(b2);
  }
  const double log_mu0 = (ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                         std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0);
  return golub_welsch(diag, off, std::exp(log_mu0));
}

QuadratureRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite needs n >= 1");
  Vector diag = Vector::Zero(n);
  Vector off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return golub_welsch(diag, off, 1.0);
}

double log_sphere_marginal_norm(int d) {
  // Z_d = Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2)) = 1 / Beta(1/2, (d-1)/2).
  return std::lgamma(0.5 * d) - 0.5 * std::log(M_PI) - std::lgamma(0.5 * (d - 1));
}

QuadratureRule sphere_marginal_rule(int d, int n) {
  if (d < 2) throw InvalidDimension("sphere_marginal_rule needs d >= 2");
  const double a = 0.5 * (d - 3);
  QuadratureRule rule = gauss_jacobi(n, a, a);
  rule.weights *= std::exp(log_sphere_marginal_norm(d));
  return rule;
}

const QuadratureRule& half_interval_rule(int d, int n) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({d, n});
  if (it == cache.end()) {
    it = cache.emplace(std::make_pair(d, n), gauss_jacobi(n, 0.5 * (d - 3), 0.0)).first;
  }
  return it->second;
}

}  // namespace featlab
