#pragma once

#include <optional>
#include <variant>

#include "featlab/activation.hpp"
#include "featlab/network_state.hpp"
#include "featlab/sampling.hpp"
#include "featlab/types.hpp"

namespace featlab {

enum class KernelMode { finite_width, closed_form };

struct ClosedFormOptions {
  /// Fixed truncation order. When unset the order is chosen adaptively so that the
  /// Parseval tail drops below tail_rtol of the retained mass.
  std::optional<int> k_max;
  double tail_rtol = 1e-10;
  int k_cap = 1 << 16;
  /// Evaluate through the summed dot-product profile (identity, relu) instead of the
  /// truncated series. Ignored when k_max is pinned.
  bool exact_profile = true;
};

/// Random-feature kernel K(x,x') = E_v[sigma2(x.v) sigma2(x'.v)], v uniform on the unit sphere.
class KernelModel {
 public:
  /// Monte Carlo kernel (1/m2) sum_j sigma2(x.v_j) sigma2(x'.v_j) over the rows of V.
  static KernelModel finite_width(const Activation& sigma2, Matrix V);
  /// sum_{k<=k_max} lambda_k^2 B(d,k) G_k(<x,x'>/d).
  static KernelModel closed_form(int d, const Activation& sigma2, const ClosedFormOptions& options = {});

  KernelMode mode() const noexcept { return mode_; }
  int dim() const noexcept { return d_; }
  const Activation& activation() const noexcept { return sigma2_; }

  const Vector& lambda_sq() const noexcept { return lambda_sq_; }
  /// lambda_k^2 B(d,k) for k <= k_max.
  const Vector& spectral_mass() const noexcept { return mass_; }
  int k_max() const noexcept { return static_cast<int>(lambda_sq_.size()) - 1; }
  /// Parseval estimate of the discarded mass sum_{k > k_max} lambda_k^2 B(d,k).
  double tail_bound() const noexcept { return tail_bound_; }
  /// E_{t ~ mu_d}[sigma2(sqrt(d) t)^2] = K(x,x) on the sqrt(d)-sphere.
  double total_mass() const noexcept { return total_mass_; }
  bool uses_exact_profile() const noexcept { return exact_profile_; }
  const Matrix& inner_weights() const noexcept { return V_; }

  double eval(const Vector& x, const Vector& x_prime) const;
  /// K(X_i, Y_j) for all row pairs.
  Matrix gram(const Matrix& X, const Matrix& Y) const;
  /// Closed-form kernel as a function of t = <x,x'>/d on the sqrt(d)-sphere.
  double profile(double t) const;
  /// Truncated spectral series at t (domain-checked).
  double series(double t) const;

 private:
  KernelModel() = default;
  void apply_profile(const Matrix& dots, const Vector& x_norms, const Vector& y_norms, Matrix& out) const;

  KernelMode mode_ = KernelMode::closed_form;
  int d_ = 0;
  Activation sigma2_ = Activation::identity();
  Matrix V_;
  Vector lambda_sq_;
  Vector mass_;
  double tail_bound_ = 0.0;
  double total_mass_ = 0.0;
  bool exact_profile_ = false;
};

/// (1/(m2 n)) sum_i r_i <h(x_i), h(x')> with h = sigma2(V x), stored as a coefficient vector.
struct FiniteFeature {
  Activation sigma2 = Activation::identity();
  Matrix V;
  Vector coef;  // (1/(m2 n)) sum_i r_i h(x_i)
};

/// (1/n) sum_i r_i K(x_i, x').
struct InfiniteFeature {
  KernelModel kernel;
  Matrix points;
  Vector residuals;
};

/// The learned feature phi together with its scale eta_bar (phi itself excludes eta_bar).
struct LearnedFeature {
  std::variant<FiniteFeature, InfiniteFeature> data;
  double eta_bar = 1.0;
  /// Theoretical eta_bar scale 1 / ||phi||_{L2}, estimated on the calibration set; diagnostic only.
  double eta_bar_theory = 0.0;

  bool is_finite() const { return std::holds_alternative<FiniteFeature>(data); }
  /// Raw phi on every row of X (without eta_bar). Query rows are processed in tiles.
  Vector evaluate(const Matrix& X) const;
  double evaluate(const Vector& x) const;
};

/// Learned feature after one step on W from theta0 (W must still be zero).
/// Residuals are labels minus f(x; theta0).
LearnedFeature learned_feature_finite(const NetworkState& theta0, const Activation& sigma2,
                                      const Dataset& D1, double eta_bar = 1.0);

/// Infinite-width learned feature with explicit residuals. The kernel must be closed form.
LearnedFeature learned_feature_infinite(const KernelModel& kernel, const Matrix& D1_points,
                                        const Vector& residuals);

/// eta_bar = 1 / max_i |phi(x_i)| over the calibration points; stored on the feature and returned.
/// Throws DegenerateFeature for an identically zero feature.
double calibrate_eta_bar(LearnedFeature& feature, const Matrix& calibration_points);
/// Same, from precomputed feature values.
double calibrate_eta_bar(LearnedFeature& feature, const Vector& phi_values);

}  // namespace featlab
