#pragma once

#include <cstdint>
#include <vector>

#include "featlab/activation.hpp"
#include "featlab/types.hpp"

namespace featlab {

/// G^{(d)}_k(t), normalized so that G_k(1) = 1, by the three-term recurrence
///   G_k = ((d+2k-4)/(d+k-3)) t G_{k-1} - ((k-1)/(d+k-3)) G_{k-2}.
/// No domain check; see GegenbauerBasis::eval for the checked version.
template <typename Scalar>
Scalar gegenbauer(int d, int k, Scalar t) {
  if (k == 0) return Scalar(1);
  Scalar prev = Scalar(1);
  Scalar curr = t;
  for (int j = 2; j <= k; ++j) {
    const Scalar denom = Scalar(d + j - 3);
    const Scalar next = (Scalar(d + 2 * j - 4) / denom) * t * curr - (Scalar(j - 1) / denom) * prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

/// Writes G_0(t), ..., G_{k_max}(t) into out (size k_max + 1).
template <typename Scalar>
void gegenbauer_all(int d, int k_max, Scalar t, Scalar* out) {
  out[0] = Scalar(1);
  if (k_max == 0) return;
  out[1] = t;
  for (int j = 2; j <= k_max; ++j) {
    const Scalar denom = Scalar(d + j - 3);
    out[j] = (Scalar(d + 2 * j - 4) / denom) * t * out[j - 1] - (Scalar(j - 1) / denom) * out[j - 2];
  }
}

/// log((n)!!) for n >= -1, with (-1)!! = 0!! = 1.
double log_double_factorial(int n);

/// B(d,k): dimension of degree-k spherical harmonics in R^d. Throws std::overflow_error
/// when the value does not fit in 64 bits.
std::uint64_t harmonic_dimension(int d, int k);

/// log B(d,k) through log-gamma; usable far beyond the 64-bit range.
double log_harmonic_dimension(int d, int k);

/// Z_d = 1 / Beta(1/2, (d-1)/2), the normalizer of mu_d.
double sphere_marginal_norm(int d);

/// chi_k = prod_{j<k} d / (d + 2j).
double sphere_moment_chi(int d, int k);

/// Closed form of G_k(0): zero for odd k, (-1)^{k/2} (k-1)!! / prod_{j<k/2} (d+2j-1) for even k.
double gegenbauer_at_zero(int d, int k);

/// Gegenbauer system for a fixed ambient dimension with cached spectral tables.
class GegenbauerBasis {
 public:
  explicit GegenbauerBasis(int d, int k_max = 32);

  int dim() const noexcept { return d_; }
  int k_max() const noexcept { return k_max_; }
  double norm_const() const noexcept { return norm_const_; }
  double harmonic_dim(int k) const;
  double chi(int k) const;

  /// Checked evaluation: k <= k_max and |t| <= 1.
  double eval(int k, double t) const;
  /// G_0(t), ..., G_{k_max}(t).
  Vector eval_all(double t) const;

 private:
  int d_;
  int k_max_;
  double norm_const_;
  std::vector<double> dims_;
  std::vector<double> chi_;
};

/// Gegenbauer expansion of ReLU on [-1, 1]: ReLU(t) = sum_k c_k G_k(t) with
/// c_k = B(d,k) <ReLU, G_k>_{mu_d}.
struct ReluGegenbauer {
  int d = 0;
  /// Closed forms: c_0 = Z_d/(d-1), even c_{2k} = B(d,2k) A_{2k}, c_1 as printed in the
  /// classical statement (1/(2d)), odd k >= 3 zero.
  Vector closed_form;
  /// Independent quadrature value of every coefficient.
  Vector quadrature;
  /// Values used downstream: closed form for even k, quadrature for odd k.
  Vector coefficients;
  /// |closed_form[1] - quadrature[1]|; the G_1 entry is reported, not enforced.
  double g1_mismatch = 0.0;
  /// Largest relative closed-form/quadrature gap over even k.
  double max_even_rel_gap = 0.0;
  /// Largest absolute quadrature value over odd k >= 3.
  double max_odd_abs = 0.0;
};

/// Throws ConsistencyError when the even coefficients disagree beyond even_rtol.
ReluGegenbauer relu_geg_coefficients(const GegenbauerBasis& basis, int k_max,
                                     double even_rtol = 1e-8);

/// <ReLU, G_k>_{mu_d} from the closed forms (k = 1 gives E[t^2]/2 = 1/(2d)).
double relu_inner_product(int d, int k);

/// ||P_{>=2m} ReLU||^2 in L^2(mu_d) = sum_{k>=m} B(d,2k) A_{2k}^2, summed until terms
/// fall below 1e-16 of the running total.
double relu_tail_norm(const GegenbauerBasis& basis, int m);
double relu_tail_norm(int d, int m);

/// lambda_k(sigma) = E_{t ~ mu_d}[sigma(sqrt(d) t) G_k(t)].
/// identity and relu use closed forms; custom activations use split Gauss-Jacobi
/// quadrature with node doubling to 1e-10 relative.
double lambda_k(int d, const Activation& sigma, int k);

/// Quadrature route for any activation (kept separate as an independent check).
double lambda_k_quadrature(int d, const Activation& sigma, int k, double rtol = 1e-10);

/// lambda_0 ... lambda_{k_max}.
Vector lambda_table(int d, const Activation& sigma, int k_max);

}  // namespace featlab
