#include "featlab/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "featlab/errors.hpp"
#include "featlab/gegenbauer.hpp"
#include "featlab/network.hpp"
#include "featlab/quadrature.hpp"

namespace featlab {

namespace {

constexpr Eigen::Index kQueryTile = 512;

/// Arc-cosine profile of the ReLU kernel for unit-norm inputs: (sin th + (pi - th) cos th) / (2 pi).
inline double relu_arccos(double c) {
  c = std::clamp(c, -1.0, 1.0);
  return (std::sqrt(std::max(0.0, 1.0 - c * c)) + (M_PI - std::acos(c)) * c) / (2.0 * M_PI);
}

/// Spectral masses lambda_k^2 B(d,k) of the ReLU kernel, k = 0..k_max.
void relu_spectrum(int d, int k_max, Vector& lambda_sq, Vector& mass) {
  lambda_sq = Vector::Zero(k_max + 1);
  mass = Vector::Zero(k_max + 1);
  const double log_d = std::log(static_cast<double>(d));
  for (int k = 0; k <= k_max; ++k) {
    if (k % 2 == 1 && k != 1) continue;
    const double inner = relu_inner_product(d, k);
    if (inner == 0.0) continue;
    const double log_lsq = log_d + 2.0 * std::log(std::abs(inner));
    lambda_sq[k] = std::exp(log_lsq);
    mass[k] = std::exp(log_lsq + log_harmonic_dimension(d, k));
  }
}

void spectrum_from_lambda(int d, const Vector& lambda, Vector& lambda_sq, Vector& mass) {
  lambda_sq = lambda.array().square();
  mass.resize(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    mass[k] = lambda_sq[k] == 0.0 ? 0.0
                                  : std::exp(std::log(lambda_sq[k]) + log_harmonic_dimension(d, static_cast<int>(k)));
  }
}

double activation_second_moment(int d, const Activation& sigma2) {
  switch (sigma2.kind()) {
    case Activation::Kind::identity:
      return 1.0;  // d E[t^2] with E[t^2] = 1/d
    case Activation::Kind::relu:
      return 0.5;
    case Activation::Kind::custom:
      break;
  }
  const double root_d = std::sqrt(static_cast<double>(d));
  auto estimate = [&](int n) {
    return integrate_sphere_marginal_split([&](double t) { const double s = sigma2(root_d * t); return s * s; }, d, n);
  };
  return converge_by_doubling(estimate, 32, 1e-12, 1 << 12, "kernel diagonal");
}

}  // namespace

KernelModel KernelModel::finite_width(const Activation& sigma2, Matrix V) {
  if (V.rows() < 1 || V.cols() < 1) throw InvalidDimension("finite-width kernel needs a nonempty V");
  KernelModel model;
  model.mode_ = KernelMode::finite_width;
  model.d_ = static_cast<int>(V.cols());
  model.sigma2_ = sigma2;
  model.V_ = std::move(V);
  return model;
}

KernelModel KernelModel::closed_form(int d, const Activation& sigma2, const ClosedFormOptions& options) {
  if (d < 2) throw InvalidDimension("closed-form kernel needs d >= 2");
  KernelModel model;
  model.mode_ = KernelMode::closed_form;
  model.d_ = d;
  model.sigma2_ = sigma2;
  model.total_mass_ = activation_second_moment(d, sigma2);
  model.exact_profile_ = options.exact_profile && !options.k_max.has_value() &&
                         sigma2.kind() != Activation::Kind::custom;

  auto build = [&](int k_max) {
    if (sigma2.kind() == Activation::Kind::relu) {
      relu_spectrum(d, k_max, model.lambda_sq_, model.mass_);
    } else {
      spectrum_from_lambda(d, lambda_table(d, sigma2, k_max), model.lambda_sq_, model.mass_);
    }
  };

  if (options.k_max) {
    if (*options.k_max < 0) throw std::invalid_argument("closed-form kernel needs k_max >= 0");
    build(*options.k_max);
    model.tail_bound_ = std::max(0.0, model.total_mass_ - model.mass_.sum());
    return model;
  }

  // Adaptive order: smallest K whose Parseval tail is below tail_rtol of the retained mass.
  int k_try = sigma2.kind() == Activation::Kind::custom ? 16 : options.k_cap;
  while (true) {
    build(k_try);
    double partial = 0.0;
    for (int k = 0; k <= k_try; ++k) {
      partial += model.mass_[k];
      if (partial > 0.0 && model.total_mass_ - partial < options.tail_rtol * partial) {
        model.lambda_sq_.conservativeResize(k + 1);
        model.mass_.conservativeResize(k + 1);
        model.tail_bound_ = std::max(0.0, model.total_mass_ - partial);
        return model;
      }
    }
    if (k_try >= options.k_cap) {
      throw ConsistencyError("closed-form kernel: spectral tail above tolerance at k_cap = " +
                             std::to_string(options.k_cap));
    }
    k_try = std::min(2 * k_try, options.k_cap);
  }
}

double KernelModel::series(double t) const {
  if (std::abs(t) > 1.0 + 1e-8) throw DomainError("kernel inputs are off the sqrt(d)-sphere");
  t = std::clamp(t, -1.0, 1.0);
  const int k_max = this->k_max();
  double sum = mass_[0];
  if (k_max == 0) return sum;
  double prev = 1.0;
  double curr = t;
  sum += mass_[1] * curr;
  for (int j = 2; j <= k_max; ++j) {
    const double denom = d_ + j - 3.0;
    const double next = ((d_ + 2.0 * j - 4.0) / denom) * t * curr - ((j - 1.0) / denom) * prev;
    prev = curr;
    curr = next;
    sum += mass_[j] * curr;
  }
  return sum;
}

double KernelModel::profile(double t) const {
  if (mode_ != KernelMode::closed_form) throw std::logic_error("profile needs a closed-form kernel");
  if (!exact_profile_) return series(t);
  if (std::abs(t) > 1.0 + 1e-8) throw DomainError("kernel inputs are off the sqrt(d)-sphere");
  if (sigma2_.kind() == Activation::Kind::identity) return t;
  return relu_arccos(t);
}

void KernelModel::apply_profile(const Matrix& dots, const Vector& x_norms, const Vector& y_norms,
                                Matrix& out) const {
  out.resize(dots.rows(), dots.cols());
  const double inv_d = 1.0 / d_;
  if (exact_profile_ && sigma2_.kind() == Activation::Kind::identity) {
    out = dots * inv_d;
    return;
  }
  if (exact_profile_) {
    // Positive homogeneity: K(x,y) = |x||y| / d * arccos_profile(cos angle).
    for (Eigen::Index j = 0; j < dots.cols(); ++j) {
      for (Eigen::Index i = 0; i < dots.rows(); ++i) {
        const double scale = x_norms[i] * y_norms[j];
        out(i, j) = scale == 0.0 ? 0.0 : scale * inv_d * relu_arccos(dots(i, j) / scale);
      }
    }
    return;
  }
  for (Eigen::Index j = 0; j < dots.cols(); ++j) {
    for (Eigen::Index i = 0; i < dots.rows(); ++i) out(i, j) = series(dots(i, j) * inv_d);
  }
}

Matrix KernelModel::gram(const Matrix& X, const Matrix& Y) const {
  if (X.cols() != d_ || Y.cols() != d_) throw InvalidDimension("kernel gram: dimension mismatch");
  if (mode_ == KernelMode::finite_width) {
    const Matrix hx = sigma2_.apply(X * V_.transpose());
    const Matrix hy = sigma2_.apply(Y * V_.transpose());
    return hx * hy.transpose() / static_cast<double>(V_.rows());
  }
  const Matrix dots = X * Y.transpose();
  Matrix out;
  apply_profile(dots, X.rowwise().norm(), Y.rowwise().norm(), out);
  return out;
}

double KernelModel::eval(const Vector& x, const Vector& x_prime) const {
  if (x.size() != d_ || x_prime.size() != d_) throw InvalidDimension("kernel eval: dimension mismatch");
  if (mode_ == KernelMode::finite_width) {
    const Vector hx = sigma2_.apply(V_ * x);
    const Vector hy = sigma2_.apply(V_ * x_prime);
    return hx.dot(hy) / static_cast<double>(V_.rows());
  }
  Matrix dots(1, 1);
  dots(0, 0) = x.dot(x_prime);
  Vector nx(1), ny(1);
  nx[0] = x.norm();
  ny[0] = x_prime.norm();
  Matrix out;
  apply_profile(dots, nx, ny, out);
  return out(0, 0);
}

Vector LearnedFeature::evaluate(const Matrix& X) const {
  Vector out(X.rows());
  if (const auto* finite = std::get_if<FiniteFeature>(&data)) {
    if (X.cols() != finite->V.cols()) throw InvalidDimension("learned feature: dimension mismatch");
    for (Eigen::Index start = 0; start < X.rows(); start += kQueryTile) {
      const Eigen::Index len = std::min(kQueryTile, X.rows() - start);
      out.segment(start, len) = finite->sigma2.apply(X.middleRows(start, len) * finite->V.transpose()) * finite->coef;
    }
    return out;
  }
  const auto& inf = std::get<InfiniteFeature>(data);
  const double inv_n = 1.0 / static_cast<double>(inf.points.rows());
  for (Eigen::Index start = 0; start < X.rows(); start += kQueryTile) {
    const Eigen::Index len = std::min(kQueryTile, X.rows() - start);
    const Matrix block = inf.kernel.gram(inf.points, X.middleRows(start, len));
    out.segment(start, len) = block.transpose() * inf.residuals * inv_n;
  }
  return out;
}

double LearnedFeature::evaluate(const Vector& x) const {
  Matrix row = x.transpose();
  return evaluate(row)[0];
}

LearnedFeature learned_feature_finite(const NetworkState& theta0, const Activation& sigma2,
                                      const Dataset& D1, double eta_bar) {
  if (theta0.stage != Stage::init || !theta0.W.isZero(0.0)) {
    throw WrongStage("learned_feature_finite needs the initial state (W = 0)");
  }
  if (D1.dim() != theta0.input_dim()) throw InvalidDimension("learned_feature_finite: dimension mismatch");
  if (D1.size() < 1) throw InvalidDimension("learned_feature_finite: empty dataset");
  const Vector r = D1.labels - forward(theta0, sigma2, D1.points);
  const Matrix h = sigma2.apply(D1.points * theta0.V.transpose());
  FiniteFeature feature{sigma2, theta0.V,
                        h.transpose() * r / (static_cast<double>(theta0.inner_width()) * D1.size())};
  LearnedFeature out{std::move(feature), eta_bar, 0.0};
  return out;
}

LearnedFeature learned_feature_infinite(const KernelModel& kernel, const Matrix& D1_points,
                                        const Vector& residuals) {
  if (kernel.mode() != KernelMode::closed_form) {
    throw std::invalid_argument("learned_feature_infinite needs a closed-form kernel");
  }
  if (D1_points.rows() != residuals.size() || D1_points.rows() < 1) {
    throw InvalidDimension("learned_feature_infinite: points/residuals mismatch");
  }
  return LearnedFeature{InfiniteFeature{kernel, D1_points, residuals}, 1.0, 0.0};
}

double calibrate_eta_bar(LearnedFeature& feature, const Vector& phi_values) {
  if (phi_values.size() == 0) throw std::invalid_argument("calibrate_eta_bar needs a nonempty set");
  const double peak = phi_values.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw DegenerateFeature("learned feature vanishes on the calibration set");
  feature.eta_bar = 1.0 / peak;
  const double rms = std::sqrt(phi_values.squaredNorm() / static_cast<double>(phi_values.size()));
  feature.eta_bar_theory = 1.0 / rms;
  return feature.eta_bar;
}

double calibrate_eta_bar(LearnedFeature& feature, const Matrix& calibration_points) {
  return calibrate_eta_bar(feature, feature.evaluate(calibration_points));
}

}  // namespace featlab
