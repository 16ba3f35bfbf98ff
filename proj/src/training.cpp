#include "featlab/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "featlab/errors.hpp"

namespace featlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Dataset make_split(const CellConfig& config, int n, std::uint64_t stream) {
  Dataset data;
  data.distribution = config.distribution;
  data.points = sample_points(config.distribution, config.target.dim(), n, config.seed.stream(stream));
  data.labels = eval_target(config.target, data.points);
  return data;
}

void validate(const CellConfig& config) {
  if (config.n < 1) throw ConfigError("cell needs n >= 1");
  if (config.m1 < 1) throw ConfigError("cell needs m1 >= 1");
  if (config.m2 && *config.m2 < 1) throw ConfigError("cell needs m2 >= 1");
  if (config.holdout_n < 1 || config.test_n < 1) throw ConfigError("cell needs nonempty holdout and test sets");
  if (config.eta_grid.empty() || config.lambda_grid.empty()) throw ConfigError("cell needs nonempty grids");
  for (double lambda : config.lambda_grid) {
    if (!(lambda > 0.0)) throw ConfigError("lambda grid entries must be positive");
  }
  for (double eta : config.eta_grid) {
    if (!(eta > 0.0)) throw ConfigError("eta grid entries must be positive");
  }
}

}  // namespace

std::vector<double> default_eta_grid() { return {0.25, 0.5, 1.0, 2.0, 4.0}; }

std::vector<double> default_lambda_grid() { return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0}; }

double pearson(const Vector& x, const Vector& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidDimension("pearson needs two equal-length samples");
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  const double denom = xc.norm() * yc.norm();
  return denom > 0.0 ? std::clamp(xc.dot(yc) / denom, -1.0, 1.0) : 0.0;
}

TrainResult train_full(const CellConfig& config) {
  validate(config);
  const int d = config.target.dim();
  TrainResult result;

  const Dataset D1 = make_split(config, config.n, streams::stage1_data);
  const Dataset D2 = make_split(config, config.n, streams::stage2_data);
  const Dataset holdout = make_split(config, config.holdout_n, streams::holdout);
  const Dataset test = make_split(config, config.test_n, streams::test);
  result.theta0 = sample_init(d, config.m1, config.m2.value_or(1), config.seed.stream(streams::init));
  const NetworkState& theta0 = result.theta0;

  auto start = Clock::now();
  if (config.m2) {
    result.feature = learned_feature_finite(theta0, config.sigma2, D1);
  } else {
    const KernelModel kernel = KernelModel::closed_form(d, config.sigma2, config.kernel_options);
    const Vector residuals = D1.labels.array() - initial_output(theta0);
    result.feature = learned_feature_infinite(kernel, D1.points, residuals);
  }
  const Vector phi2 = result.feature.evaluate(D2.points);
  const Vector phi_hold = result.feature.evaluate(holdout.points);
  const Vector phi_test = result.feature.evaluate(test.points);
  calibrate_eta_bar(result.feature, phi2);
  result.eta_bar_calibrated = result.feature.eta_bar;
  result.eta_bar_theory = result.feature.eta_bar_theory;
  result.stage1_seconds = seconds_since(start);

  start = Clock::now();
  const double base = config.eta_bar_override.value_or(result.eta_bar_calibrated);
  const double n2 = static_cast<double>(D2.size());
  double best = std::numeric_limits<double>::infinity();
  for (double multiplier : config.eta_grid) {
    const double eta_bar = multiplier * base;
    const StageTwoDesign design = stage_two_design(theta0.a, theta0.b, phi2, eta_bar, 0.0);
    const StageTwoDesign hold = stage_two_design(theta0.a, theta0.b, phi_hold, eta_bar, 0.0);
    // One eigensolve of the Gram matrix serves the whole lambda grid.
    const Matrix G = design.psi.transpose() * design.psi / n2;
    const Vector c = design.psi.transpose() * D2.labels / n2;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
    const Vector proj = eig.eigenvectors().transpose() * c;
    for (double lambda : config.lambda_grid) {
      const Vector coef = proj.array() / (eig.eigenvalues().array().max(0.0) + 0.5 * lambda);
      const Vector a = eig.eigenvectors() * coef;
      const double mse = (hold.psi * a - holdout.labels).squaredNorm() / holdout.size();
      if (mse < best) {
        best = mse;
        result.eta_chosen = eta_bar;
        result.lambda_chosen = lambda;
      }
    }
  }
  if (!std::isfinite(best)) throw DegenerateFeature("holdout search produced no finite error");
  result.holdout_mse = best;

  const StageTwoDesign design =
      stage_two_design(theta0.a, theta0.b, phi2, result.eta_chosen, result.lambda_chosen);
  result.a = stage2_fit(design, D2.labels, config.solver);
  result.stage2_seconds = seconds_since(start);

  const StageTwoDesign test_design = stage_two_design(theta0.a, theta0.b, phi_test, result.eta_chosen, 0.0);
  result.test_mse = (test_design.psi * result.a - test.labels).squaredNorm() / test.size();
  result.feature_corr = pearson(phi_test, eval_feature(config.target, test.points));

  if (config.m2) {
    NetworkState trained =
        stage1_step(theta0, config.sigma2, D1, eta1_from_eta_bar(result.eta_chosen, config.m1, *config.m2));
    trained.a = result.a;
    trained.stage = Stage::post_stage2;
    result.network = std::move(trained);
  }
  return result;
}

}  // namespace featlab
