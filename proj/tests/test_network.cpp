#include <doctest.h>

#include <cmath>

#include "featlab/errors.hpp"
#include "featlab/kernel.hpp"
#include "featlab/network.hpp"
#include "featlab/targets.hpp"

using namespace featlab;

namespace {

NetworkState tiny_state(double a, double w, double b, double v) {
  NetworkState theta;
  theta.a = Vector::Constant(1, a);
  theta.W = Matrix::Constant(1, 1, w);
  theta.b = Vector::Constant(1, b);
  theta.V = Matrix::Constant(1, 1, v);
  return theta;
}

}  // namespace

TEST_CASE("forward at initialization is constant") {
  const NetworkState theta = sample_init(5, 64, 32, Seed{1, 0});
  const Vector out = forward(theta, Activation::relu(), sample_gaussian(5, 10, Seed{1, 1}));
  double expected = 0.0;
  for (int j = 0; j < 64; ++j) expected += theta.a[j] * std::max(theta.b[j], 0.0);
  expected /= 64.0;
  CHECK((out.array() - expected).abs().maxCoeff() < 1e-15);
  CHECK(initial_output(theta) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("forward with one unit") {
  NetworkState theta;
  theta.a = Vector::Ones(1);
  theta.W = Matrix(1, 3);
  theta.W << 0.5, -1.0, 2.0;
  theta.b = Vector::Zero(1);
  theta.V = Matrix::Identity(3, 3);
  Vector x(3);
  x << 1.0, 0.25, -0.5;
  // relu(<w, relu(x)>) = relu(0.5 - 0.25 + 0) = 0.25
  CHECK(forward(theta, Activation::relu(), x) == doctest::Approx(0.25));
  x[0] = -1.0;
  CHECK(forward(theta, Activation::relu(), x) == 0.0);
}

TEST_CASE("mean output at initialization vanishes over random inits") {
  const int trials = 10000;
  Vector outs(trials);
  for (int t = 0; t < trials; ++t) outs[t] = initial_output(sample_init(3, 4, 2, Seed{2, static_cast<std::uint64_t>(t)}));
  const double se = std::sqrt((outs.array() - outs.mean()).square().sum() / (trials - 1.0) / trials);
  CHECK(std::abs(outs.mean()) <= 3.0 * se);
}

TEST_CASE("stage-1 step on a hand-sized instance") {
  // n = 2, m1 = m2 = d = 1, identity inner activation.
  const NetworkState theta = tiny_state(1.0, 0.0, 0.5, 1.0);
  Dataset data;
  data.points = Matrix(2, 1);
  data.points << 1.0, -2.0;
  data.labels = Vector(2);
  data.labels << 3.0, 1.0;
  const double eta1 = 0.1;
  const NetworkState next = stage1_step(theta, Activation::identity(), data, eta1);
  // L1 = (1/2) sum (relu(w x_i + 0.5) - y_i)^2, dL1/dw at w = 0 = (-2.5 * 1 + -0.5 * -2) = -1.5.
  CHECK(next.W(0, 0) == doctest::Approx(0.15).epsilon(1e-12));
  // Same value from the feature form: (eta_bar / m2) a (1/n) sum r_i h(x_i), eta_bar = 2 eta1 m2 / m1.
  const double eta_bar = eta_bar_from_eta1(eta1, 1, 1);
  CHECK(eta_bar * 0.5 * (2.5 * 1.0 + 0.5 * -2.0) == doctest::Approx(next.W(0, 0)).epsilon(1e-12));
  CHECK(next.stage == Stage::post_stage1);
  CHECK_THROWS_AS(stage1_step(next, Activation::identity(), data, eta1), WrongStage);
}

TEST_CASE("stage-1 zero residuals and negative biases") {
  NetworkState theta = sample_init(4, 32, 16, Seed{3, 0});
  Dataset data;
  data.points = sample_sphere(4, 2.0, 20, Seed{3, 1});
  data.labels = forward(theta, Activation::relu(), data.points);
  CHECK(stage1_step(theta, Activation::relu(), data, 1.0).W.isZero(0.0));

  data.labels = sample_gaussian(1, 20, Seed{3, 2}).col(0);
  const NetworkState next = stage1_step(theta, Activation::relu(), data, 1.0);
  for (int j = 0; j < 32; ++j) {
    if (theta.b[j] < 0.0) CHECK(next.W.row(j).isZero(0.0));
  }
  CHECK(next.V == theta.V);
  CHECK(next.b == theta.b);
}

TEST_CASE("stage-1 gradient matches central differences") {
  const Activation sigma = Activation::relu();
  int accepted = 0;
  for (std::uint64_t draw = 0; accepted < 20 && draw < 500; ++draw) {
    NetworkState theta = sample_init(4, 8, 8, Seed{4, draw});
    theta.W = sample_gaussian(8, 8, Seed{5, draw});
    Dataset data;
    data.points = sample_sphere(4, 2.0, 16, Seed{6, draw});
    data.labels = sample_gaussian(1, 16, Seed{7, draw}).col(0);
    Matrix z = theta.W * sigma.apply(data.points * theta.V.transpose()).transpose();
    z.colwise() += theta.b;
    if (z.cwiseAbs().minCoeff() < 1e-3) continue;
    ++accepted;
    const Matrix grad = loss_gradient_W(theta, sigma, data);
    for (int j = 0; j < 8; ++j) {
      for (int k = 0; k < 8; ++k) {
        NetworkState plus = theta, minus = theta;
        plus.W(j, k) += 1e-5;
        minus.W(j, k) -= 1e-5;
        const double fd = (empirical_loss(plus, sigma, data) - empirical_loss(minus, sigma, data)) / 2e-5;
        CHECK(std::abs(fd - grad(j, k)) <= 1e-4 * std::max(std::abs(grad(j, k)), 1e-6 * grad.cwiseAbs().maxCoeff()));
      }
    }
  }
  CHECK(accepted == 20);
}

TEST_CASE("network after stage 1 is a 1-D function of the learned feature") {
  const Activation sigma = Activation::relu();
  const int d = 5, m1 = 50, m2 = 40, n = 64;
  const NetworkState theta0 = sample_init(d, m1, m2, Seed{8, 0});
  Dataset D1;
  D1.points = sample_sphere(d, std::sqrt(5.0), n, Seed{8, 1});
  D1.labels = sample_gaussian(1, n, Seed{8, 2}).col(0);
  const double eta1 = 0.7;
  const NetworkState theta1 = stage1_step(theta0, sigma, D1, eta1);
  const LearnedFeature feature = learned_feature_finite(theta0, sigma, D1);
  const Matrix test = sample_sphere(d, std::sqrt(5.0), 256, Seed{8, 3});
  const Vector phi = feature.evaluate(test);
  const double eta_bar = eta_bar_from_eta1(eta1, m1, m2);
  CHECK(eta1_from_eta_bar(eta_bar, m1, m2) == doctest::Approx(eta1));
  Vector expected = Vector::Zero(256);
  for (int j = 0; j < m1; ++j) {
    if (theta0.b[j] <= 0.0) continue;
    expected += theta0.a[j] * (theta0.a[j] * eta_bar * phi.array() + theta0.b[j]).cwiseMax(0.0).matrix() / m1;
  }
  CHECK((forward(theta1, sigma, test) - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("stage-2 design zeroes gated columns") {
  Vector a0(3), b(3), phi(4);
  a0 << 1, -1, 1;
  b << 0.5, -0.2, 0.0;
  phi << 0.1, -0.3, 0.9, 2.0;
  const StageTwoDesign design = stage_two_design(a0, b, phi, 2.0, 0.1);
  CHECK(design.psi.col(1).isZero(0.0));
  CHECK(design.psi.col(2).isZero(0.0));
  CHECK(design.psi(0, 0) == doctest::Approx((0.2 + 0.5) / 3.0));
  CHECK(design.psi(1, 0) == 0.0);
}

TEST_CASE("stage-2 ridge solvers") {
  const int n = 200, m1 = 30;
  StageTwoDesign design;
  design.psi = sample_gaussian(m1, n, Seed{9, 0}).cwiseAbs();
  design.lambda = 1e-2;
  const Vector y = sample_gaussian(1, n, Seed{9, 1}).col(0);

  SUBCASE("gd reaches the direct minimizer") {
    const Vector direct = stage2_fit(design, y, Stage2Solver::direct());
    const Vector gd = stage2_fit(design, y, Stage2Solver::gd());
    CHECK(stage2_objective(design, y, gd) - stage2_objective(design, y, direct) < 1e-6);
    CHECK(stage2_objective(design, y, direct) <= stage2_objective(design, y, gd) + 1e-12);
  }
  SUBCASE("large lambda shrinks to zero") {
    design.lambda = 1e6;
    const Vector a = stage2_fit(design, y);
    CHECK(a.norm() < 1e-5);
    CHECK(stage2_objective(design, y, a) == doctest::Approx(y.squaredNorm() / n).epsilon(1e-4));
  }
  SUBCASE("single nonzero column has the 1-D closed form") {
    StageTwoDesign one = design;
    one.psi.setZero();
    one.psi.col(4) = design.psi.col(4);
    Vector a = stage2_fit(one, y);
    const Vector c = one.psi.col(4);
    const double expected = c.dot(y) / (c.dot(c) + n * one.lambda / 2.0);
    CHECK(a[4] == doctest::Approx(expected).epsilon(1e-10));
    a[4] = 0.0;
    CHECK(a.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("too large a step diverges") {
    CHECK_THROWS_AS(stage2_fit(design, y, Stage2Solver::gd(100.0, 1000)), StepSizeError);
  }
  SUBCASE("direct needs positive lambda") {
    design.lambda = 0.0;
    CHECK_THROWS(stage2_fit(design, y, Stage2Solver::direct()));
  }
}
