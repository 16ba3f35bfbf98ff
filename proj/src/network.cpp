#include "featlab/network.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "featlab/errors.hpp"

namespace featlab {

namespace {

void check_dims(const NetworkState& theta, Eigen::Index d) {
  if (d != theta.input_dim()) throw InvalidDimension("network: input dimension mismatch");
}

/// Pre-activations W sigma2(V x) + b, one column per point (m1 x n).
Matrix pre_activations(const NetworkState& theta, const Matrix& H) {
  Matrix z = theta.W * H.transpose();
  z.colwise() += theta.b;
  return z;
}

}  // namespace

Vector forward(const NetworkState& theta, const Activation& sigma2, const Matrix& X) {
  check_dims(theta, X.cols());
  const Matrix H = sigma2.apply(X * theta.V.transpose());
  const Matrix z = pre_activations(theta, H);
  return z.cwiseMax(0.0).transpose() * theta.a / static_cast<double>(theta.outer_width());
}

double forward(const NetworkState& theta, const Activation& sigma2, const Vector& x) {
  const Matrix row = x.transpose();
  return forward(theta, sigma2, row)[0];
}

double initial_output(const NetworkState& theta) {
  return theta.a.dot(theta.b.cwiseMax(0.0)) / static_cast<double>(theta.outer_width());
}

double empirical_loss(const NetworkState& theta, const Activation& sigma2, const Dataset& data) {
  return (forward(theta, sigma2, data.points) - data.labels).squaredNorm() / data.size();
}

Matrix loss_gradient_W(const NetworkState& theta, const Activation& sigma2, const Dataset& data) {
  check_dims(theta, data.dim());
  const Matrix H = sigma2.apply(data.points * theta.V.transpose());  // n x m2
  const Matrix z = pre_activations(theta, H);               // m1 x n
  const Vector f = z.cwiseMax(0.0).transpose() * theta.a / static_cast<double>(theta.outer_width());
  const Vector err = f - data.labels;
  // dL/dz_ji = (2/n) err_i (1/m1) a_j 1[z_ji > 0]
  Matrix delta = (z.array() > 0.0).cast<double>().matrix();
  delta = theta.a.asDiagonal() * delta * err.asDiagonal();
  return delta * H * (2.0 / (static_cast<double>(data.size()) * theta.outer_width()));
}

NetworkState stage1_step(const NetworkState& theta_init, const Activation& sigma2, const Dataset& D1,
                         double eta1) {
  if (theta_init.stage != Stage::init) throw WrongStage("stage1_step needs the initial state");
  NetworkState out = theta_init;
  out.W -= eta1 * loss_gradient_W(theta_init, sigma2, D1);
  out.stage = Stage::post_stage1;
  return out;
}

double eta_bar_from_eta1(double eta1, int m1, int m2) {
  return 2.0 * eta1 * static_cast<double>(m2) / static_cast<double>(m1);
}

double eta1_from_eta_bar(double eta_bar, int m1, int m2) {
  return eta_bar * static_cast<double>(m1) / (2.0 * static_cast<double>(m2));
}

StageTwoDesign stage_two_design(const Vector& a0, const Vector& b, const Vector& phi_values, double eta_bar,
                                double lambda) {
  if (a0.size() != b.size()) throw InvalidDimension("stage_two_design: a0 and b differ in length");
  const Eigen::Index m1 = a0.size();
  StageTwoDesign design;
  design.eta_bar = eta_bar;
  design.lambda = lambda;
  design.psi = Matrix::Zero(phi_values.size(), m1);
  const Vector scaled = eta_bar * phi_values;
  for (Eigen::Index j = 0; j < m1; ++j) {
    if (!(b[j] > 0.0)) continue;
    design.psi.col(j) = ((a0[j] * scaled).array() + b[j]).cwiseMax(0.0) / static_cast<double>(m1);
  }
  return design;
}

double stage2_objective(const StageTwoDesign& design, const Vector& labels, const Vector& a) {
  const double n = static_cast<double>(labels.size());
  return (design.psi * a - labels).squaredNorm() / n + 0.5 * design.lambda * a.squaredNorm();
}

Vector stage2_fit(const StageTwoDesign& design, const Vector& labels, const Stage2Solver& solver) {
  if (design.psi.rows() != labels.size() || labels.size() == 0) {
    throw InvalidDimension("stage2_fit: design and labels differ in length");
  }
  const double n = static_cast<double>(labels.size());
  const Eigen::Index m1 = design.psi.cols();
  const Matrix G = design.psi.transpose() * design.psi / n;
  const Vector c = design.psi.transpose() * labels / n;

  if (solver.kind == Stage2Solver::Kind::direct) {
    if (!(design.lambda > 0.0)) throw std::invalid_argument("direct ridge needs lambda > 0");
    Matrix system = G;
    system.diagonal().array() += 0.5 * design.lambda;
    return Eigen::LLT<Matrix>(system).solve(c);
  }

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  const double smooth = 2.0 * eig.eigenvalues().maxCoeff() + design.lambda;
  const double strong = std::max(2.0 * eig.eigenvalues().minCoeff(), 0.0) + design.lambda;
  const double eta2 = solver.eta2.value_or(1.0 / smooth);
  const double y_sq = labels.squaredNorm() / n;

  long steps = 0;
  if (solver.steps) {
    steps = *solver.steps;
  } else {
    if (!(strong > 0.0)) throw std::invalid_argument("gd without a step count needs lambda > 0");
    // The objective at a = 0 bounds the initial gap.
    const double gap0 = std::max(y_sq, solver.tol);
    const double rate = std::min(1.0, eta2 * strong);
    steps = static_cast<long>(std::ceil(std::log(gap0 / solver.tol) / rate)) + 1;
    steps = std::min(steps, solver.max_steps);
  }

  auto objective = [&](const Vector& a) {
    return a.dot(G * a) - 2.0 * c.dot(a) + y_sq + 0.5 * design.lambda * a.squaredNorm();
  };
  Vector a = Vector::Zero(m1);
  double last = objective(a);
  int increases = 0;
  for (long t = 0; t < steps; ++t) {
    a -= eta2 * (2.0 * (G * a - c) + design.lambda * a);
    const double value = objective(a);
    if (!std::isfinite(value) || value > last + 1e-14 * std::abs(last)) {
      if (++increases >= 10 || !std::isfinite(value)) {
        throw StepSizeError("stage-2 gradient descent diverged at step " + std::to_string(t + 1));
      }
    } else {
      increases = 0;
    }
    last = value;
  }
  return a;
}

}  // namespace featlab
