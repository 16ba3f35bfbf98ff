#pragma once

#include <cstdint>
#include <string>

#include "featlab/activation.hpp"
#include "featlab/sampling.hpp"
#include "featlab/types.hpp"

namespace featlab {

enum class TargetKind { single_index, quadratic, separation };

/// theory: ||A||_F^2 = (d+2)/(2d) so that E[(x^T A x)^2] = 1 on the sqrt(d)-sphere.
/// appendix_a: ||A||_F = 1.
enum class Normalization { theory, appendix_a };

/// Where a centering constant came from.
struct ConstantProvenance {
  bool estimated = false;
  std::uint64_t n_mc = 0;
  Seed seed{};
};

/// f*(x) = g*(w*.x)                 (single_index)
/// f*(x) = g*(x^T A x) - c0          (quadratic, c0 = 0 unless centered)
/// f*(x) = ReLU(x^T A x) - c0        (separation)
struct TargetSpec {
  TargetKind kind = TargetKind::single_index;
  Vector w_star;
  Link link = Link::identity();
  Matrix A;
  Matrix U;
  double c0 = 0.0;
  ConstantProvenance c0_provenance;

  int dim() const { return kind == TargetKind::single_index ? static_cast<int>(w_star.size())
                                                            : static_cast<int>(A.rows()); }
};

constexpr std::uint64_t kDefaultMonteCarlo = 1u << 18;

/// Removes the trace and rescales to the requested Frobenius norm.
/// Throws DegenerateTarget when A_raw is a multiple of the identity.
Matrix normalize_quadratic(const Matrix& A_raw, Normalization normalization = Normalization::theory);

TargetSpec make_single_index(const Vector& w_star, const Link& link);
TargetSpec make_random_single_index(int d, const Link& link, const Seed& seed);

/// g*(x^T A x); when center is true, c0 = E[g*(x^T A x)] is estimated from n_mc fresh sphere samples.
TargetSpec make_quadratic(const Matrix& A, const Link& link, bool center, const Seed& seed,
                          std::uint64_t n_mc = kDefaultMonteCarlo);

/// A = d^{-1/2} U [[0, I], [I, 0]] U^T with U Haar-random (or the identity), c0 by Monte Carlo.
TargetSpec make_separation_target(int d, const Seed& seed, bool random_rotation = true,
                                  std::uint64_t n_mc = kDefaultMonteCarlo);

/// x^T A x for every row.
Vector quadratic_form(const Matrix& A, const Matrix& points);

Vector eval_target(const TargetSpec& spec, const Matrix& points);
/// True intermediate feature h*: w*.x or x^T A x.
Vector eval_feature(const TargetSpec& spec, const Matrix& points);

/// c1 = E_{z ~ N(0,1)}[g'(z)]: closed forms where known, Gauss-Hermite with node doubling otherwise.
double link_derivative_mean(const Link& link);

/// kappa = ||A||_op sqrt(d) from a symmetric eigensolve.
double incoherence(const Matrix& A);
/// ||A||_op by power iteration on A^2 (independent of the eigensolver).
double operator_norm_power(const Matrix& A, int max_iter = 100000, double tol = 1e-15);

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& text);
std::string to_string(Normalization normalization);
Normalization parse_normalization(const std::string& text);

}  // namespace featlab
