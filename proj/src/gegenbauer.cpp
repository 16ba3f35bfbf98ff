#include "featlab/gegenbauer.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "featlab/errors.hpp"
#include "featlab/quadrature.hpp"

namespace featlab {

namespace {

using u128 = unsigned __int128;

void require_dim(int d) {
  if (d < 2) throw InvalidDimension("Gegenbauer system needs d >= 2, got " + std::to_string(d));
}

/// log |A_{2k}| where A_{2k} = <ReLU, G_{2k}>_{mu_d}.
double log_abs_relu_even(int d, int k) {
  const double log_z = log_sphere_marginal_norm(d);
  if (k == 0) return log_z - std::log(d - 1.0);
  // prod_{j=0}^{k} (d + 2j - 1) = 2^{k+1} Gamma(h + k + 1) / Gamma(h), h = (d-1)/2.
  const double h = 0.5 * (d - 1.0);
  const double log_prod = (k + 1.0) * std::log(2.0) + std::lgamma(h + k + 1.0) - std::lgamma(h);
  return log_z + log_double_factorial(2 * k - 3) - log_prod;
}

double relu_even_sign(int k) { return (k == 0 || k % 2 == 1) ? 1.0 : -1.0; }

/// Quadrature table of <ReLU, G_k>_{mu_d}, k = 0..k_max, with n nodes per half interval.
Vector relu_inner_products_quadrature(int d, int k_max, int n) {
  Vector out = Vector::Zero(k_max + 1);
  std::vector<double> g(k_max + 1);
  const double a = 0.5 * (d - 3);
  const QuadratureRule& rule = half_interval_rule(d, n);
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double t = 0.5 * (1.0 + rule.nodes[i]);
    const double w = rule.weights[i] * std::pow(1.0 + t, a) * t;
    gegenbauer_all(d, k_max, t, g.data());
    for (int k = 0; k <= k_max; ++k) out[k] += w * g[k];
  }
  return out * std::exp(log_sphere_marginal_norm(d) - (a + 1.0) * std::log(2.0));
}

Vector converge_table(const std::function<Vector(int)>& table, int n0, double rtol,
                      const std::string& what) {
  Vector coarse = table(n0);
  for (int n = 2 * n0; n <= 4096; n *= 2) {
    Vector fine = table(n);
    const double scale = fine.cwiseAbs().maxCoeff();
    bool ok = true;
    for (Eigen::Index k = 0; k < fine.size(); ++k) {
      const double tol = rtol * std::abs(fine[k]) + 1e-15 * scale;
      if (std::abs(fine[k] - coarse[k]) > tol) ok = false;
    }
    if (ok) return fine;
    coarse = std::move(fine);
  }
  throw QuadratureError(what + ": table did not converge", coarse[0], coarse[0]);
}

}  // namespace

double log_double_factorial(int n) {
  if (n < -1) throw std::invalid_argument("double factorial needs n >= -1");
  if (n <= 0) return 0.0;
  if (n % 2 == 1) {
    // (2m-1)!! = 2^m Gamma(m + 1/2) / sqrt(pi), n = 2m - 1.
    const double m = 0.5 * (n + 1);
    return m * std::log(2.0) + std::lgamma(m + 0.5) - 0.5 * std::log(M_PI);
  }
  const double m = 0.5 * n;
  return m * std::log(2.0) + std::lgamma(m + 1.0);
}

std::uint64_t harmonic_dimension(int d, int k) {
  require_dim(d);
  if (k < 0) throw std::invalid_argument("harmonic_dimension needs k >= 0");
  if (k == 0) return 1;
  // C(k+d-3, k-1) built multiplicatively; each partial product is itself a binomial.
  const std::uint64_t top = static_cast<std::uint64_t>(k) + d - 3;
  const std::uint64_t r = static_cast<std::uint64_t>(k) - 1;
  const u128 limit = ~u128(0);
  u128 c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    const u128 factor = top - r + i;
    if (c > limit / factor) throw std::overflow_error("harmonic_dimension overflow");
    c = c * factor / i;
  }
  const u128 factor = static_cast<u128>(2 * static_cast<std::uint64_t>(k) + d - 2);
  if (c > limit / factor) throw std::overflow_error("harmonic_dimension overflow");
  const u128 num = c * factor;
  if (num % static_cast<u128>(k) != 0) throw std::logic_error("harmonic_dimension not integral");
  const u128 value = num / static_cast<u128>(k);
  if (value > std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("harmonic_dimension exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(value);
}

double log_harmonic_dimension(int d, int k) {
  require_dim(d);
  if (k < 0) throw std::invalid_argument("log_harmonic_dimension needs k >= 0");
  if (k == 0) return 0.0;
  if (d == 2) return std::log(2.0);
  // B(d,k) = (2k+d-2) Gamma(k+d-2) / (k Gamma(k) Gamma(d-1)).
  return std::log(2.0 * k + d - 2.0) + std::lgamma(k + d - 2.0) - std::log(static_cast<double>(k)) -
         std::lgamma(static_cast<double>(k)) - std::lgamma(d - 1.0);
}

double sphere_marginal_norm(int d) {
  require_dim(d);
  return std::exp(log_sphere_marginal_norm(d));
}

double sphere_moment_chi(int d, int k) {
  double chi = 1.0;
  for (int j = 0; j < k; ++j) chi *= static_cast<double>(d) / (d + 2.0 * j);
  return chi;
}

double gegenbauer_at_zero(int d, int k) {
  if (k % 2 == 1) return 0.0;
  const int half = k / 2;
  double log_prod = 0.0;
  for (int j = 0; j < half; ++j) log_prod += std::log(d + 2.0 * j - 1.0);
  const double magnitude = std::exp(log_double_factorial(k - 1) - log_prod);
  return (half % 2 == 0) ? magnitude : -magnitude;
}

GegenbauerBasis::GegenbauerBasis(int d, int k_max)
    : d_(d), k_max_(k_max), norm_const_(0.0) {
  require_dim(d);
  if (k_max < 0) throw std::invalid_argument("GegenbauerBasis needs k_max >= 0");
  norm_const_ = sphere_marginal_norm(d);
  dims_.resize(k_max + 1);
  chi_.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    try {
      dims_[k] = static_cast<double>(harmonic_dimension(d, k));
    } catch (const std::overflow_error&) {
      dims_[k] = std::exp(log_harmonic_dimension(d, k));
    }
    chi_[k] = sphere_moment_chi(d, k);
  }
}

double GegenbauerBasis::harmonic_dim(int k) const {
  if (k < 0 || k > k_max_) throw std::out_of_range("harmonic_dim: k outside [0, k_max]");
  return dims_[k];
}

double GegenbauerBasis::chi(int k) const {
  if (k < 0 || k > k_max_) throw std::out_of_range("chi: k outside [0, k_max]");
  return chi_[k];
}

double GegenbauerBasis::eval(int k, double t) const {
  if (k < 0 || k > k_max_) throw std::out_of_range("eval: k outside [0, k_max]");
  if (!(std::abs(t) <= 1.0)) throw DomainError("Gegenbauer argument outside [-1, 1]");
  return gegenbauer(d_, k, t);
}

Vector GegenbauerBasis::eval_all(double t) const {
  if (!(std::abs(t) <= 1.0)) throw DomainError("Gegenbauer argument outside [-1, 1]");
  Vector out(k_max_ + 1);
  gegenbauer_all(d_, k_max_, t, out.data());
  return out;
}

double relu_inner_product(int d, int k) {
  require_dim(d);
  if (k < 0) throw std::invalid_argument("relu_inner_product needs k >= 0");
  if (k == 1) return 0.5 / d;
  if (k % 2 == 1) return 0.0;
  return relu_even_sign(k / 2) * std::exp(log_abs_relu_even(d, k / 2));
}

ReluGegenbauer relu_geg_coefficients(const GegenbauerBasis& basis, int k_max, double even_rtol) {
  if (k_max < 1) throw std::invalid_argument("relu_geg_coefficients needs k_max >= 1");
  if (k_max > basis.k_max()) throw std::out_of_range("relu_geg_coefficients: k_max above basis");
  const int d = basis.dim();
  ReluGegenbauer out;
  out.d = d;
  out.closed_form = Vector::Zero(k_max + 1);
  for (int k = 0; k <= k_max; k += 2) {
    out.closed_form[k] = basis.harmonic_dim(k) * relu_inner_product(d, k);
  }
  out.closed_form[1] = 0.5 / d;

  const Vector inner = converge_table(
      [&](int n) { return relu_inner_products_quadrature(d, k_max, n); }, k_max + 16, 1e-13,
      "ReLU Gegenbauer quadrature");
  out.quadrature.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) out.quadrature[k] = basis.harmonic_dim(k) * inner[k];

  out.coefficients = out.closed_form;
  for (int k = 1; k <= k_max; k += 2) out.coefficients[k] = out.quadrature[k];
  out.g1_mismatch = std::abs(out.closed_form[1] - out.quadrature[1]);
  for (int k = 0; k <= k_max; k += 2) {
    const double gap = std::abs(out.closed_form[k] - out.quadrature[k]) / std::abs(out.closed_form[k]);
    out.max_even_rel_gap = std::max(out.max_even_rel_gap, gap);
  }
  for (int k = 3; k <= k_max; k += 2) {
    out.max_odd_abs = std::max(out.max_odd_abs, std::abs(out.quadrature[k]));
  }
  if (out.max_even_rel_gap > even_rtol) {
    throw ConsistencyError("ReLU even Gegenbauer coefficients: closed form and quadrature disagree (rel " +
                           std::to_string(out.max_even_rel_gap) + ")");
  }
  return out;
}

double relu_tail_norm(int d, int m) {
  require_dim(d);
  if (m < 1) throw std::invalid_argument("relu_tail_norm needs m >= 1");
  // log|A_{2k}| updated incrementally: (2k-3)!! and prod_{j<=k} (d+2j-1).
  double log_abs_a = log_abs_relu_even(d, m);
  double sum = 0.0;
  for (long k = m;; ++k) {
    const double term = std::exp(log_harmonic_dimension(d, static_cast<int>(2 * k)) + 2.0 * log_abs_a);
    sum += term;
    if (k > m + 8 && k > d && term < 1e-16 * sum) break;
    if (k > 100'000'000) throw std::runtime_error("relu_tail_norm did not converge");
    const double next = static_cast<double>(k + 1);
    log_abs_a += (k >= 1 ? std::log(2.0 * next - 3.0) : 0.0) - std::log(d + 2.0 * next - 1.0);
  }
  return sum;
}

double relu_tail_norm(const GegenbauerBasis& basis, int m) {
  if (2 * m > basis.k_max()) throw std::out_of_range("relu_tail_norm needs 2m <= k_max");
  return relu_tail_norm(basis.dim(), m);
}

double lambda_k_quadrature(int d, const Activation& sigma, int k, double rtol) {
  require_dim(d);
  const double root_d = std::sqrt(static_cast<double>(d));
  auto estimate = [&](int n) {
    return integrate_sphere_marginal_split(
        [&](double t) { return sigma(root_d * t) * gegenbauer(d, k, t); }, d, n);
  };
  // Coefficients that vanish by symmetry never settle in relative terms; measure against |sigma|.
  const double scale = std::sqrt(integrate_sphere_marginal_split(
      [&](double t) { const double s = sigma(root_d * t); return s * s; }, d, 64));
  double coarse = estimate(k + 16);
  for (int n = 2 * (k + 16); n <= (1 << 12); n *= 2) {
    const double fine = estimate(n);
    if (std::abs(fine - coarse) <= rtol * std::max(std::abs(fine), 1e-4 * scale)) return fine;
    coarse = fine;
  }
  throw QuadratureError("lambda_k quadrature: no convergence under node doubling", coarse, coarse);
}

double lambda_k(int d, const Activation& sigma, int k) {
  require_dim(d);
  if (k < 0) throw std::invalid_argument("lambda_k needs k >= 0");
  switch (sigma.kind()) {
    case Activation::Kind::identity:
      return k == 1 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
    case Activation::Kind::relu:
      return std::sqrt(static_cast<double>(d)) * relu_inner_product(d, k);
    case Activation::Kind::custom:
      break;
  }
  return lambda_k_quadrature(d, sigma, k);
}

Vector lambda_table(int d, const Activation& sigma, int k_max) {
  require_dim(d);
  if (sigma.kind() != Activation::Kind::custom) {
    Vector out(k_max + 1);
    for (int k = 0; k <= k_max; ++k) out[k] = lambda_k(d, sigma, k);
    return out;
  }
  const double root_d = std::sqrt(static_cast<double>(d));
  const double a = 0.5 * (d - 3);
  auto table = [&](int n) {
    Vector out = Vector::Zero(k_max + 1);
    std::vector<double> g(k_max + 1);
    const QuadratureRule& rule = half_interval_rule(d, n);
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
      const double t = 0.5 * (1.0 + rule.nodes[i]);
      const double w = rule.weights[i] * std::pow(1.0 + t, a);
      gegenbauer_all(d, k_max, t, g.data());
      const double sp = sigma(root_d * t);
      const double sm = sigma(-root_d * t);
      for (int k = 0; k <= k_max; ++k) out[k] += w * (sp + ((k % 2 == 0) ? sm : -sm)) * g[k];
    }
    return Vector(out * std::exp(log_sphere_marginal_norm(d) - (a + 1.0) * std::log(2.0)));
  };
  return converge_table(table, k_max + 16, 1e-10, "lambda table quadrature");
}

}  // namespace featlab
