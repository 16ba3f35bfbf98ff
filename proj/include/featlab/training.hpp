#pragma once

#include <optional>
#include <vector>

#include "featlab/activation.hpp"
#include "featlab/kernel.hpp"
#include "featlab/network.hpp"
#include "featlab/network_state.hpp"
#include "featlab/sampling.hpp"
#include "featlab/targets.hpp"

namespace featlab {

/// Seed streams used by one training cell.
namespace streams {
inline constexpr std::uint64_t target = 1;
inline constexpr std::uint64_t stage1_data = 2;
inline constexpr std::uint64_t stage2_data = 3;
inline constexpr std::uint64_t holdout = 4;
inline constexpr std::uint64_t test = 5;
inline constexpr std::uint64_t init = 6;
}  // namespace streams

std::vector<double> default_eta_grid();
std::vector<double> default_lambda_grid();

/// One (n, seed) cell of the layer-wise training protocol.
struct CellConfig {
  TargetSpec target;
  Distribution distribution = Distribution::sphere_sqrt_d;
  int n = 0;
  int m1 = 512;
  /// Inner width; unset means the closed-form (infinite-width) kernel.
  std::optional<int> m2;
  Activation sigma2 = Activation::relu();
  int holdout_n = 1 << 15;
  int test_n = 1 << 15;
  /// Multipliers applied to the calibrated eta_bar.
  std::vector<double> eta_grid = default_eta_grid();
  std::vector<double> lambda_grid = default_lambda_grid();
  /// Replaces the calibrated eta_bar before the multipliers are applied.
  std::optional<double> eta_bar_override;
  Stage2Solver solver = Stage2Solver::direct();
  ClosedFormOptions kernel_options;
  Seed seed;
};

struct TrainResult {
  double eta_bar_calibrated = 0.0;
  double eta_bar_theory = 0.0;
  double eta_chosen = 0.0;
  double lambda_chosen = 0.0;
  double holdout_mse = 0.0;
  double test_mse = 0.0;
  double feature_corr = 0.0;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  NetworkState theta0;
  /// Fitted outer weights.
  Vector a;
  /// Full trained network (finite inner width only).
  std::optional<NetworkState> network;
  LearnedFeature feature;
};

/// Pearson correlation; zero when either input is constant.
double pearson(const Vector& x, const Vector& y);

/// Samples the data, learns the feature, calibrates eta_bar, grid-searches (eta, lambda) on the
/// holdout set, refits with the configured solver, and evaluates on the test set.
TrainResult train_full(const CellConfig& config);

}  // namespace featlab
