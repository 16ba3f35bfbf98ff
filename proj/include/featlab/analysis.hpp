#pragma once

#include <functional>
#include <optional>

#include "featlab/sampling.hpp"
#include "featlab/types.hpp"

namespace featlab {

/// Degree-2 harmonic projection of f on the sqrt(d)-sphere, as the matrix T2 with
/// P2 f(x) = x^T T2 x - Tr(T2) |x|^2 / d.
struct ProjectionEstimate {
  Matrix T2;
  int n_used = 0;
  /// Batch-means standard error of T2 in Frobenius norm (10 batches).
  double standard_error = 0.0;
  /// Set when n < d^2.
  bool underdetermined = false;
};

/// T2 = Traceless(Sym(E_n[f x x^T])) / (2 chi_2).
ProjectionEstimate estimate_T2(const Matrix& points, const Vector& f_values);

struct MeanEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Sample mean of q_i x_i^T B x_i with its standard error.
MeanEstimate cross_term(const Matrix& points, const Vector& q_values, const Matrix& B);

/// Random symmetric traceless B with <A, B>_F = 0, scaled to the Frobenius norm of A.
Matrix random_orthogonal_harmonic(const Matrix& A, const Seed& seed);

/// (1/n) sum_i |x_(i) - Phi^{-1}((i - 0.5)/n)| over the sorted samples.
double w1_to_gaussian(Vector samples);

struct LowerBoundCertificate {
  int d = 0;
  /// 1 / (512 k_star^2).
  double epsilon = 0.0;
  int k_star = 0;
  /// Largest width (resp. weight bound) for which the inequality at k_star still holds.
  double m_bound = 0.0;
  double B_bound = 0.0;
  /// log of 2(m+1) C (B d^{3/2})^{alpha+1} / sqrt(B(d/2, 2k)) and of 1/(32k) at k_star.
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  /// epsilon <= 1/2048, the range in which the certificate is stated.
  bool epsilon_in_range = false;
};

/// Largest k < d/8 with 2(m+1) max(C,1) (B d^{3/2})^{alpha+1} / sqrt(B(d/2, 2k)) < 1/(32k), or none.
/// Throws InvalidDimension for odd d or d < 4.
std::optional<LowerBoundCertificate> two_layer_lower_bound(int d, double m, double B, double alpha_sigma,
                                                           double C_sigma = 1.0);

/// Re-evaluates the defining inequality with B(d/2, 2k) summed term by term in log space.
bool verify_certificate(const LowerBoundCertificate& certificate, double m, double B, double alpha_sigma,
                        double C_sigma = 1.0);

/// Weight function v(a, b) on {-1, 1} x [0, 2] with E_{a,b}[v(a,b) relu(a x + b)] = f(x) on [-1, 1],
/// a ~ Unif{+-1}, b ~ N(0, 1).
class UnivariateWeight {
 public:
  using Fn = std::function<double(double)>;
  UnivariateWeight(Fn f, Fn f_prime, Fn f_second);

  double operator()(int a, double b) const;
  /// Constant and linear corrector coefficients.
  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }
  /// max |v| over a grid of 4001 b values per sign.
  double sup_abs() const;
  /// E_{a,b}[v(a,b) relu(a x + b)] by Gauss-Legendre on the pieces of [0, 2], doubling nodes to rtol.
  double reconstruct(double x, double rtol = 1e-13) const;

 private:
  Fn f_second_;
  double c1_;
  double c2_;
  double constant_scale_;
  double linear_scale_;
};

UnivariateWeight univariate_construct(UnivariateWeight::Fn f, UnivariateWeight::Fn f_prime,
                                      UnivariateWeight::Fn f_second);

}  // namespace featlab
