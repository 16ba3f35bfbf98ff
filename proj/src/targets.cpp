#include "featlab/targets.hpp"

#include <cmath>

#include "featlab/errors.hpp"
#include "featlab/quadrature.hpp"

namespace featlab {

Matrix normalize_quadratic(const Matrix& A_raw, Normalization normalization) {
  if (A_raw.rows() != A_raw.cols() || A_raw.rows() < 2) {
    throw InvalidDimension("normalize_quadratic needs a square matrix with d >= 2");
  }
  const double d = static_cast<double>(A_raw.rows());
  Matrix centered = 0.5 * (A_raw + A_raw.transpose());
  centered.diagonal().array() -= centered.trace() / d;
  const double frob = centered.norm();
  if (!(frob > 1e-12 * std::max(1.0, A_raw.norm()))) {
    throw DegenerateTarget("quadratic target is a multiple of the identity after trace removal");
  }
  const double target = normalization == Normalization::theory ? std::sqrt((d + 2.0) / (2.0 * d)) : 1.0;
  return centered * (target / frob);
}

TargetSpec make_single_index(const Vector& w_star, const Link& link) {
  const double norm = w_star.norm();
  if (w_star.size() < 1 || !(norm > 0.0)) throw DegenerateTarget("single-index direction is zero");
  TargetSpec spec;
  spec.kind = TargetKind::single_index;
  spec.w_star = w_star / norm;
  spec.link = link;
  return spec;
}

TargetSpec make_random_single_index(int d, const Link& link, const Seed& seed) {
  const Matrix direction = sample_sphere(d, 1.0, 1, seed);
  return make_single_index(direction.row(0).transpose(), link);
}

Vector quadratic_form(const Matrix& A, const Matrix& points) {
  return (points * A).cwiseProduct(points).rowwise().sum();
}

TargetSpec make_quadratic(const Matrix& A, const Link& link, bool center, const Seed& seed,
                          std::uint64_t n_mc) {
  if (A.rows() != A.cols()) throw InvalidDimension("quadratic target needs square A");
  TargetSpec spec;
  spec.kind = TargetKind::quadratic;
  spec.A = A;
  spec.link = link;
  if (center) {
    const int d = static_cast<int>(A.rows());
    const Matrix x = sample_sphere(d, std::sqrt(static_cast<double>(d)), static_cast<int>(n_mc), seed);
    spec.c0 = quadratic_form(A, x).unaryExpr([&](double z) { return link(z); }).mean();
    spec.c0_provenance = {true, n_mc, seed};
  }
  return spec;
}

TargetSpec make_separation_target(int d, const Seed& seed, bool random_rotation, std::uint64_t n_mc) {
  if (d < 4 || d % 2 != 0) {
    throw InvalidDimension("separation target needs even d >= 4, got " + std::to_string(d));
  }
  const int half = d / 2;
  Matrix block = Matrix::Zero(d, d);
  block.topRightCorner(half, half).setIdentity();
  block.bottomLeftCorner(half, half).setIdentity();
  TargetSpec spec;
  spec.kind = TargetKind::separation;
  spec.link = Link::relu();
  spec.U = random_rotation ? random_orthogonal(d, seed) : Matrix::Identity(d, d);
  spec.A = spec.U * block * spec.U.transpose() / std::sqrt(static_cast<double>(d));
  spec.A = 0.5 * (spec.A + spec.A.transpose()).eval();
  const Matrix x = sample_sphere(d, std::sqrt(static_cast<double>(d)), static_cast<int>(n_mc),
                                 seed.stream(seed.stream_id + 1));
  spec.c0 = quadratic_form(spec.A, x).cwiseMax(0.0).mean();
  spec.c0_provenance = {true, n_mc, seed.stream(seed.stream_id + 1)};
  return spec;
}

Vector eval_feature(const TargetSpec& spec, const Matrix& points) {
  if (points.cols() != spec.dim()) throw InvalidDimension("eval_feature: dimension mismatch");
  if (spec.kind == TargetKind::single_index) return points * spec.w_star;
  return quadratic_form(spec.A, points);
}

Vector eval_target(const TargetSpec& spec, const Matrix& points) {
  const Vector h = eval_feature(spec, points);
  return h.unaryExpr([&](double z) { return spec.link(z) - spec.c0; });
}

double link_derivative_mean(const Link& link) {
  switch (link.kind()) {
    case Link::Kind::identity:
      return 1.0;
    case Link::Kind::cube:
      return 3.0;
    case Link::Kind::relu:
    case Link::Kind::smoothed_relu:
      // P(z > eps) + (Phi(eps) - 1/2) = 1/2 for every eps.
      return 0.5;
    case Link::Kind::sigmoid:
    case Link::Kind::custom:
      break;
  }
  auto estimate = [&](int n) { return gauss_hermite(n).integrate([&](double z) { return link.derivative(z); }); };
  return converge_by_doubling(estimate, 16, 1e-12, 1024, "link derivative mean", 1e-14);
}

double incoherence(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff() * std::sqrt(static_cast<double>(A.rows()));
}

double operator_norm_power(const Matrix& A, int max_iter, double tol) {
  const Matrix A2 = A * A;
  Vector v = Vector::Ones(A.rows()) / std::sqrt(static_cast<double>(A.rows()));
  // Deterministic perturbation so v is not orthogonal to the top eigenvector by accident.
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += 1e-3 * std::sin(1.0 + i);
  v.normalize();
  double estimate = v.dot(A2 * v);
  for (int it = 0; it < max_iter; ++it) {
    Vector w = A2 * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = v.dot(A2 * v);
    if (std::abs(next - estimate) <= tol * std::abs(next)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return std::sqrt(estimate);
}

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::single_index:
      return "single_index";
    case TargetKind::quadratic:
      return "quadratic";
    case TargetKind::separation:
      return "separation";
  }
  return {};
}

TargetKind parse_target_kind(const std::string& text) {
  if (text == "single_index") return TargetKind::single_index;
  if (text == "quadratic") return TargetKind::quadratic;
  if (text == "separation") return TargetKind::separation;
  throw ConfigError("unknown setting '" + text + "'");
}

std::string to_string(Normalization normalization) {
  return normalization == Normalization::theory ? "theory" : "appendix_a";
}

Normalization parse_normalization(const std::string& text) {
  if (text == "theory") return Normalization::theory;
  if (text == "appendix_a") return Normalization::appendix_a;
  throw ConfigError("unknown normalization '" + text + "'");
}

}  // namespace featlab
