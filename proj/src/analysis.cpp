#include "featlab/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "featlab/errors.hpp"
#include "featlab/gegenbauer.hpp"
#include "featlab/quadrature.hpp"

namespace featlab {

namespace {

constexpr int kBatches = 10;

Matrix second_moment_projection(const Matrix& points, const Vector& f_values) {
  const int d = static_cast<int>(points.cols());
  const double chi2 = sphere_moment_chi(d, 2);
  Matrix M = points.transpose() * f_values.asDiagonal() * points / static_cast<double>(points.rows());
  M = 0.5 * (M + M.transpose()).eval();
  M.diagonal().array() -= M.trace() / d;
  return M / (2.0 * chi2);
}

double gaussian_density(double b) { return std::exp(-0.5 * b * b) / std::sqrt(2.0 * M_PI); }

double gaussian_mass(double lo, double hi) {
  return 0.5 * (std::erfc(lo / std::sqrt(2.0)) - std::erfc(hi / std::sqrt(2.0)));
}

}  // namespace

ProjectionEstimate estimate_T2(const Matrix& points, const Vector& f_values) {
  if (points.rows() != f_values.size()) throw InvalidDimension("estimate_T2: points and values differ");
  if (points.rows() < kBatches) throw InvalidDimension("estimate_T2 needs at least 10 points");
  const int d = static_cast<int>(points.cols());
  const Eigen::Index n = points.rows();
  ProjectionEstimate out;
  out.n_used = static_cast<int>(n);
  out.underdetermined = n < static_cast<Eigen::Index>(d) * d;
  out.T2 = second_moment_projection(points, f_values);
  out.T2 = 0.5 * (out.T2 + out.T2.transpose()).eval();

  const Eigen::Index size = n / kBatches;
  std::vector<Matrix> batches;
  Matrix mean = Matrix::Zero(d, d);
  for (int k = 0; k < kBatches; ++k) {
    batches.push_back(second_moment_projection(points.middleRows(k * size, size), f_values.segment(k * size, size)));
    mean += batches.back() / kBatches;
  }
  double spread = 0.0;
  for (const Matrix& batch : batches) spread += (batch - mean).squaredNorm();
  out.standard_error = std::sqrt(spread / (kBatches * (kBatches - 1.0)));
  return out;
}

MeanEstimate cross_term(const Matrix& points, const Vector& q_values, const Matrix& B) {
  if (points.rows() != q_values.size() || points.rows() < 2) {
    throw InvalidDimension("cross_term: points and values differ");
  }
  const Vector terms = q_values.cwiseProduct((points * B).cwiseProduct(points).rowwise().sum());
  const double n = static_cast<double>(terms.size());
  const double mean = terms.mean();
  const double var = (terms.array() - mean).square().sum() / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

Matrix random_orthogonal_harmonic(const Matrix& A, const Seed& seed) {
  const int d = static_cast<int>(A.rows());
  Matrix B = random_symmetric_traceless(d, SymmetricKind::gauss_sym, seed);
  B.diagonal().array() -= B.trace() / d;
  const double a_sq = A.squaredNorm();
  if (a_sq > 0.0) B -= (A.cwiseProduct(B).sum() / a_sq) * A;
  B = 0.5 * (B + B.transpose()).eval();
  return B * (std::sqrt(a_sq) / B.norm());
}

double w1_to_gaussian(Vector samples) {
  const Eigen::Index n = samples.size();
  if (n < 1) throw std::invalid_argument("w1_to_gaussian needs samples");
  std::sort(samples.begin(), samples.end());
  const boost::math::normal_distribution<double> normal;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    sum += std::abs(samples[i] - boost::math::quantile(normal, p));
  }
  return sum / static_cast<double>(n);
}

std::optional<LowerBoundCertificate> two_layer_lower_bound(int d, double m, double B, double alpha_sigma,
                                                           double C_sigma) {
  if (d < 4 || d % 2 != 0) throw InvalidDimension("lower bound needs an even d >= 4");
  if (!(m >= 1.0) || !(B >= 1.0)) throw std::invalid_argument("lower bound needs m, B >= 1");
  const double log_c = std::log(std::max(C_sigma, 1.0));
  const double log_scale = (alpha_sigma + 1.0) * (std::log(B) + 1.5 * std::log(static_cast<double>(d)));
  const double log_m1 = std::log1p(m);
  std::optional<LowerBoundCertificate> out;
  for (int k = 1; 8 * k < d; ++k) {
    const double half_log_dim = 0.5 * log_harmonic_dimension(d / 2, 2 * k);
    const double lhs = std::log(2.0) + log_m1 + log_c + log_scale - half_log_dim;
    const double rhs = -std::log(32.0 * k);
    if (lhs < rhs) {
      LowerBoundCertificate cert;
      cert.d = d;
      cert.k_star = k;
      cert.epsilon = 1.0 / (512.0 * k * static_cast<double>(k));
      cert.log_lhs = lhs;
      cert.log_rhs = rhs;
      // Slack in log space turned into the largest admissible m and B.
      const double slack = rhs - lhs;
      cert.m_bound = std::exp(log_m1 + slack) - 1.0;
      cert.B_bound = B * std::exp(slack / (alpha_sigma + 1.0));
      cert.epsilon_in_range = cert.epsilon <= 1.0 / 2048.0;
      out = cert;
    }
  }
  return out;
}

bool verify_certificate(const LowerBoundCertificate& certificate, double m, double B, double alpha_sigma,
                        double C_sigma) {
  const int n = certificate.d / 2;
  const int k = 2 * certificate.k_star;
  if (8 * certificate.k_star >= certificate.d || certificate.k_star < 1) return false;
  // B(n, k) = (2k + n - 2)/k * C(k + n - 3, k - 1), with the binomial as a sum of logs.
  double log_dim = std::log(2.0 * k + n - 2.0) - std::log(static_cast<double>(k));
  for (int i = 1; i <= k - 1; ++i) log_dim += std::log(static_cast<double>(n - 2 + i)) - std::log(static_cast<double>(i));
  const double lhs = std::log(2.0) + std::log(m + 1.0) + std::log(std::max(C_sigma, 1.0)) +
                     (alpha_sigma + 1.0) * std::log(B * std::pow(static_cast<double>(certificate.d), 1.5)) -
                     0.5 * log_dim;
  const double rhs = -std::log(32.0 * certificate.k_star);
  const double eps = 1.0 / (512.0 * certificate.k_star * static_cast<double>(certificate.k_star));
  return lhs < rhs && std::abs(eps - certificate.epsilon) <= 1e-15 * eps;
}

UnivariateWeight::UnivariateWeight(Fn f, Fn f_prime, Fn f_second)
    : f_second_(std::move(f_second)),
      c1_(f(0.0) - f(1.0) - f(-1.0) + f_prime(1.0) - f_prime(-1.0)),
      c2_(f_prime(0.0) - f_prime(1.0) - f_prime(-1.0)),
      constant_scale_(1.0 / (gaussian_density(1.0) - gaussian_density(2.0))),
      linear_scale_(1.0 / gaussian_mass(1.0, 2.0)) {}

double UnivariateWeight::operator()(int a, double b) const {
  if ((a != 1 && a != -1) || b < 0.0 || b > 2.0) return 0.0;
  double value = 0.0;
  if (b <= 1.0) value += 2.0 * f_second_(-a * b) / gaussian_density(b);
  if (b >= 1.0) value -= c1_ * constant_scale_ + c2_ * linear_scale_ * a;
  return value;
}

double UnivariateWeight::sup_abs() const {
  double out = 0.0;
  constexpr int kGrid = 4000;
  for (int a : {-1, 1}) {
    for (int i = 0; i <= kGrid; ++i) {
      const double b = 2.0 * i / kGrid;
      out = std::max({out, std::abs((*this)(a, b)), std::abs((*this)(a, std::nextafter(b, 0.0)))});
    }
  }
  return out;
}

double UnivariateWeight::reconstruct(double x, double rtol) const {
  // Pieces of [0, 2] on which the integrand is smooth: the relu kink sits at b = |x| for one sign
  // of a, and v jumps at b = 1.
  const double kink = std::min(std::abs(x), 1.0);
  auto estimate = [&](int nodes) {
    const QuadratureRule rule = gauss_legendre(nodes);
    auto piece = [&](int a, double lo, double hi, bool lower) {
      if (hi <= lo) return 0.0;
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        const double b = mid + half * rule.nodes[i];
        double v = 0.0;
        if (lower) {
          v = 2.0 * f_second_(-a * b) / gaussian_density(b);
        } else {
          v = -(c1_ * constant_scale_ + c2_ * linear_scale_ * a);
        }
        sum += rule.weights[i] * v * std::max(a * x + b, 0.0) * gaussian_density(b);
      }
      return half * sum;
    };
    double total = 0.0;
    for (int a : {-1, 1}) {
      total += piece(a, 0.0, kink, true) + piece(a, kink, 1.0, true) + piece(a, 1.0, 2.0, false);
    }
    return 0.5 * total;
  };
  double coarse = estimate(16);
  for (int nodes = 32; nodes <= 4096; nodes *= 2) {
    const double fine = estimate(nodes);
    if (std::abs(fine - coarse) <= rtol * std::max(1.0, std::abs(fine))) return fine;
    coarse = fine;
  }
  throw QuadratureError("univariate reconstruction: no convergence under node doubling", coarse, coarse);
}

UnivariateWeight univariate_construct(UnivariateWeight::Fn f, UnivariateWeight::Fn f_prime,
                                      UnivariateWeight::Fn f_second) {
  return UnivariateWeight(std::move(f), std::move(f_prime), std::move(f_second));
}

}  // namespace featlab
