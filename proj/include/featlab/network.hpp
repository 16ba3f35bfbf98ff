#pragma once

#include <optional>

#include "featlab/activation.hpp"
#include "featlab/network_state.hpp"
#include "featlab/sampling.hpp"
#include "featlab/types.hpp"

namespace featlab {

/// f(x; theta) = (1/m1) a^T relu(W sigma2(V x) + b) for every row of X.
Vector forward(const NetworkState& theta, const Activation& sigma2, const Matrix& X);
double forward(const NetworkState& theta, const Activation& sigma2, const Vector& x);

/// Output at W = 0, which does not depend on x: (1/m1) sum_j a_j relu(b_j).
double initial_output(const NetworkState& theta);

/// (1/n) sum_i (f(x_i; theta) - y_i)^2.
double empirical_loss(const NetworkState& theta, const Activation& sigma2, const Dataset& data);

/// Gradient of empirical_loss with respect to W, from the chain rule (relu'(0) = 0).
Matrix loss_gradient_W(const NetworkState& theta, const Activation& sigma2, const Dataset& data);

/// One gradient step on W from the initial state: W1 = -eta1 grad_W L1.
NetworkState stage1_step(const NetworkState& theta_init, const Activation& sigma2, const Dataset& D1,
                         double eta1);

/// eta_bar = 2 eta1 m2 / m1 and its inverse. With this scaling the row of W1 is
/// 1[b_j > 0] eta_bar a_j phi-coefficients, phi as in learned_feature_finite.
double eta_bar_from_eta1(double eta1, int m1, int m2);
double eta1_from_eta_bar(double eta_bar, int m1, int m2);

/// psi_j(x) = (1/m1) relu(a0_j eta_bar phi(x) + b_j) 1[b_j > 0], one row per point.
struct StageTwoDesign {
  Matrix psi;
  double eta_bar = 1.0;
  double lambda = 0.0;
};

StageTwoDesign stage_two_design(const Vector& a0, const Vector& b, const Vector& phi_values, double eta_bar,
                                double lambda);

struct Stage2Solver {
  enum class Kind { gd, direct };
  Kind kind = Kind::direct;
  /// Step size for gd; 1/L when unset.
  std::optional<double> eta2;
  /// Iteration count for gd; derived from the condition number when unset.
  std::optional<long> steps;
  /// Objective-gap target for the derived iteration count.
  double tol = 1e-12;
  long max_steps = 50'000'000;

  static Stage2Solver direct() { return {}; }
  static Stage2Solver gd(std::optional<double> eta2 = {}, std::optional<long> steps = {}) {
    Stage2Solver s;
    s.kind = Kind::gd;
    s.eta2 = eta2;
    s.steps = steps;
    return s;
  }
};

/// mean((psi a - y)^2) + (lambda/2) |a|^2.
double stage2_objective(const StageTwoDesign& design, const Vector& labels, const Vector& a);

/// Minimizes stage2_objective from a = 0. gd throws StepSizeError after 10 consecutive increases.
Vector stage2_fit(const StageTwoDesign& design, const Vector& labels, const Stage2Solver& solver = {});

}  // namespace featlab
