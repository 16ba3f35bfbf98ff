#include "featlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "featlab/analysis.hpp"
#include "featlab/errors.hpp"
#include "featlab/gegenbauer.hpp"
#include "featlab/kernel.hpp"
#include "featlab/network.hpp"
#include "featlab/quadrature.hpp"
#include "featlab/sampling.hpp"
#include "featlab/targets.hpp"

namespace featlab {

namespace {

class Report {
 public:
  Report(std::string suite, std::vector<CheckResult>& out) : suite_(std::move(suite)), out_(out) {}

  void at_most(const std::string& name, double measured, double threshold) {
    out_.push_back({suite_, name, measured, threshold, "<=", measured <= threshold});
  }
  void at_least(const std::string& name, double measured, double threshold) {
    out_.push_back({suite_, name, measured, threshold, ">=", measured >= threshold});
  }

 private:
  std::string suite_;
  std::vector<CheckResult>& out_;
};

void gegenbauer_suite(std::vector<CheckResult>& out) {
  Report report("gegenbauer", out);
  double orth = 0.0;
  for (int d : {4, 10, 25}) {
    const GegenbauerBasis basis(d, 8);
    const QuadratureRule rule = sphere_marginal_rule(d, 24);
    for (int j = 0; j <= 8; ++j) {
      for (int k = 0; k <= 8; ++k) {
        const double value = rule.integrate([&](double t) { return basis.eval(j, t) * basis.eval(k, t); });
        const double expected = j == k ? 1.0 / basis.harmonic_dim(k) : 0.0;
        orth = std::max(orth, std::abs(value - expected));
      }
    }
  }
  report.at_most("orthogonality |<G_j,G_k> - delta/B(d,k)|", orth, 1e-8);

  double unit = 0.0;
  for (int d : {3, 8, 40}) {
    for (int k = 0; k <= 20; ++k) unit = std::max(unit, std::abs(gegenbauer(d, k, 1.0) - 1.0));
  }
  report.at_most("normalization |G_k(1) - 1|", unit, 1e-12);

  double gap = 0.0;
  for (int d : {6, 12}) {
    const GegenbauerBasis basis(d, 8);
    gap = std::max(gap, relu_geg_coefficients(basis, 6, 1.0).max_even_rel_gap);
  }
  report.at_most("relu even coefficients closed form vs quadrature (rel)", gap, 1e-8);

  double ratio = std::numeric_limits<double>::infinity();
  for (int d : {16, 32, 64, 128}) {
    for (int m = 1; m <= d / 8; ++m) {
      ratio = std::min(ratio, relu_tail_norm(d, m) * 512.0 * m * m * d);
    }
  }
  report.at_least("tail norm / (1/(512 m^2 d))", ratio, 1.0);
}

void kernel_suite(std::vector<CheckResult>& out, const CheckOptions& options) {
  Report report("kernel", out);
  const int d = 16;
  ClosedFormOptions closed;
  closed.k_max = options.kernel_k_max;

  for (const Activation& sigma : {Activation::identity(), Activation::relu()}) {
    const std::string tag = " (" + sigma.name() + ")";
    const KernelModel kernel = KernelModel::closed_form(d, sigma, closed);
    const Matrix x = sample_sphere(d, std::sqrt(static_cast<double>(d)), 64, Seed{11, 1});
    const Matrix gram = kernel.gram(x, x);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    report.at_least("Mercer min eigenvalue / trace" + tag, eig.eigenvalues().minCoeff() / gram.trace(), -1e-8);
    report.at_most("symmetry max |K(x,y) - K(y,x)|" + tag, (gram - gram.transpose()).cwiseAbs().maxCoeff(), 0.0);

    // Finite-width Monte Carlo against the closed form, 100 pairs.
    const int m2 = 100000;
    const Matrix V = sample_sphere(d, 1.0, m2, Seed{11, 2});
    const Matrix xs = sample_sphere(d, std::sqrt(static_cast<double>(d)), 100, Seed{11, 3});
    const Matrix ys = sample_sphere(d, std::sqrt(static_cast<double>(d)), 100, Seed{11, 4});
    const Matrix hx = sigma.apply(xs * V.transpose());
    const Matrix hy = sigma.apply(ys * V.transpose());
    double worst = 0.0;
    double max_se = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector prod = hx.row(i).cwiseProduct(hy.row(i)).transpose();
      const double mean = prod.mean();
      const double se = std::sqrt((prod.array() - mean).square().sum() / (m2 - 1.0) / m2);
      worst = std::max(worst, std::abs(mean - kernel.eval(xs.row(i).transpose(), ys.row(i).transpose())));
      max_se = std::max(max_se, se);
    }
    report.at_most("closed form vs Monte Carlo, max gap / max SE" + tag, worst / max_se, 4.0);

    // Operator diagonalization on zonal harmonics of degree 1 and 2.
    const int n = 1 << 16;
    const Matrix xp = sample_sphere(d, std::sqrt(static_cast<double>(d)), n, Seed{11, 5});
    const Matrix eval_points = sample_sphere(d, std::sqrt(static_cast<double>(d)), 16, Seed{11, 6});
    const Vector u = sample_sphere(d, 1.0, 1, Seed{11, 7}).row(0).transpose();
    const double root_d = std::sqrt(static_cast<double>(d));
    const Matrix kx = kernel.gram(eval_points, xp);
    for (int k : {1, 2}) {
      const double lambda_sq = std::pow(lambda_k(d, sigma, k), 2);
      const Vector f = ((xp * u) / root_d).unaryExpr([&](double t) { return gegenbauer(d, k, t); });
      const Vector f_eval = ((eval_points * u) / root_d).unaryExpr([&](double t) { return gegenbauer(d, k, t); });
      double z_max = 0.0;
      for (Eigen::Index i = 0; i < eval_points.rows(); ++i) {
        const Vector terms = kx.row(i).transpose().cwiseProduct(f);
        const double mean = terms.mean();
        const double se = std::sqrt((terms.array() - mean).square().sum() / (n - 1.0) / n);
        z_max = std::max(z_max, std::abs(mean - lambda_sq * f_eval[i]) / se);
      }
      report.at_most("operator diagonalization degree " + std::to_string(k) + ", max |z|" + tag, z_max, 3.0);
    }
  }

  // Funk-Hecke: E_{t ~ mu_d}[K(t) G_k(t)] = lambda_k^2.
  for (const Activation& sigma : {Activation::identity(), Activation::relu()}) {
    const KernelModel kernel = KernelModel::closed_form(d, sigma, closed);
    const QuadratureRule rule = sphere_marginal_rule(d, 256);
    double worst = 0.0;
    for (int k = 0; k <= 4; ++k) {
      const double value = rule.integrate([&](double t) { return kernel.profile(t) * gegenbauer(d, k, t); });
      worst = std::max(worst, std::abs(value - std::pow(lambda_k(d, sigma, k), 2)));
    }
    report.at_most("Funk-Hecke projection |E[K G_k] - lambda_k^2|, k <= 4 (" + sigma.name() + ")", worst, 1e-8);
  }

  const KernelModel relu = KernelModel::closed_form(d, Activation::relu(), closed);
  report.at_most("relu diagonal |K(x,x) - 1/2|", std::abs(relu.profile(1.0) - 0.5), 1e-9);
  if (relu.uses_exact_profile()) {
    const KernelModel series_model = KernelModel::closed_form(d, Activation::relu(), {std::nullopt, 1e-10, 1 << 16, false});
    double gap = 0.0;
    for (double t = -1.0; t <= 1.0; t += 0.01) gap = std::max(gap, std::abs(relu.profile(t) - series_model.series(t)));
    report.at_most("relu series vs summed profile", gap, 1e-6);
  }
}

void training_suite(std::vector<CheckResult>& out) {
  Report report("training", out);
  const Activation sigma = Activation::relu();
  const int d = 4, m1 = 8, m2 = 8, n = 16;
  double worst = 0.0;
  int accepted = 0;
  for (std::uint64_t draw = 0; accepted < 20 && draw < 1000; ++draw) {
    NetworkState theta = sample_init(d, m1, m2, Seed{21, draw});
    theta.W = sample_gaussian(m2, m1, Seed{22, draw});
    Dataset data;
    data.points = sample_sphere(d, 2.0, n, Seed{23, draw});
    data.labels = sample_gaussian(1, n, Seed{24, draw}).col(0);
    const Matrix H = sigma.apply(data.points * theta.V.transpose());
    Matrix z = theta.W * H.transpose();
    z.colwise() += theta.b;
    if (z.cwiseAbs().minCoeff() < 1e-3) continue;
    ++accepted;
    const Matrix grad = loss_gradient_W(theta, sigma, data);
    const double h = 1e-5;
    for (int j = 0; j < m1; ++j) {
      for (int k = 0; k < m2; ++k) {
        NetworkState plus = theta, minus = theta;
        plus.W(j, k) += h;
        minus.W(j, k) -= h;
        const double fd = (empirical_loss(plus, sigma, data) - empirical_loss(minus, sigma, data)) / (2.0 * h);
        const double scale = std::max(std::abs(grad(j, k)), 1e-6 * grad.cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(fd - grad(j, k)) / std::max(scale, 1e-300));
      }
    }
  }
  report.at_least("gradient check draws accepted", accepted, 20);
  report.at_most("stage-1 gradient vs central differences (rel)", worst, 1e-4);

  // One step from the initial state and the 1-D rewriting.
  const int dd = 6, mm1 = 64, mm2 = 32, nn = 128;
  const NetworkState theta0 = sample_init(dd, mm1, mm2, Seed{31, 0});
  Dataset D1;
  D1.points = sample_sphere(dd, std::sqrt(6.0), nn, Seed{31, 1});
  D1.labels = quadratic_form(normalize_quadratic(random_symmetric_traceless(dd, SymmetricKind::gauss_sym, Seed{31, 2})),
                             D1.points);
  const double eta1 = 0.3;
  const NetworkState theta1 = stage1_step(theta0, sigma, D1, eta1);
  const double eta_bar = eta_bar_from_eta1(eta1, mm1, mm2);
  LearnedFeature feature = learned_feature_finite(theta0, sigma, D1);
  const Matrix test = sample_sphere(dd, std::sqrt(6.0), 256, Seed{31, 3});
  const Vector phi = feature.evaluate(test);
  const StageTwoDesign design = stage_two_design(theta0.a, theta0.b, phi, eta_bar, 0.0);
  const Vector rewritten = design.psi * theta0.a;
  const Vector direct = forward(theta1, sigma, test);
  report.at_most("network after stage 1 equals 1-D form", (rewritten - direct).cwiseAbs().maxCoeff(), 1e-10);
  const bool frozen = theta1.V == theta0.V && theta1.b == theta0.b;
  report.at_least("V and b unchanged by stage 1", frozen ? 1.0 : 0.0, 1.0);

  // gd vs direct ridge.
  const Vector stage2_labels = quadratic_form(Matrix::Identity(dd, dd) / dd, test).array() - 1.0 + phi.array();
  StageTwoDesign ridge = design;
  ridge.lambda = 1e-3;
  const Vector a_direct = stage2_fit(ridge, stage2_labels, Stage2Solver::direct());
  const Vector a_gd = stage2_fit(ridge, stage2_labels, Stage2Solver::gd());
  report.at_most("stage-2 gd vs direct objective gap",
                 stage2_objective(ridge, stage2_labels, a_gd) - stage2_objective(ridge, stage2_labels, a_direct), 1e-6);
}

void analysis_suite(std::vector<CheckResult>& out) {
  Report report("analysis", out);
  const int d = 8;
  const Matrix x = sample_sphere(d, std::sqrt(8.0), 4096, Seed{41, 0});
  const Vector f1 = sample_gaussian(1, 4096, Seed{41, 1}).col(0);
  const Vector f2 = x.col(0).cwiseProduct(x.col(1));
  const ProjectionEstimate p1 = estimate_T2(x, f1);
  const ProjectionEstimate p2 = estimate_T2(x, f2);
  const ProjectionEstimate p12 = estimate_T2(x, 0.7 * f1 - 1.3 * f2);
  report.at_most("T2 linearity", (p12.T2 - (0.7 * p1.T2 - 1.3 * p2.T2)).cwiseAbs().maxCoeff(), 1e-10);
  report.at_most("T2 trace", std::abs(p2.T2.trace()), 1e-10);

  const auto cert = two_layer_lower_bound(1000, 1.0, 1.0, 1.0);
  report.at_least("lower bound certificate at d=1000 verified", cert && verify_certificate(*cert, 1.0, 1.0, 1.0), 1.0);
  double previous = 0.0;
  bool monotone = true;
  for (double m : {1e3, 1e1, 1.0}) {
    const auto c = two_layer_lower_bound(1000, m, 1.0, 1.0);
    const double eps = c ? c->epsilon : std::numeric_limits<double>::infinity();
    if (previous != 0.0 && eps > previous) monotone = false;
    previous = eps;
  }
  report.at_least("certified epsilon nonincreasing as m decreases", monotone ? 1.0 : 0.0, 1.0);

  struct Case {
    const char* name;
    UnivariateWeight::Fn f, fp, fpp;
  };
  const std::vector<Case> cases = {
      {"1", [](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }},
      {"x", [](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }},
      {"x^2", [](double t) { return t * t; }, [](double t) { return 2.0 * t; }, [](double) { return 2.0; }},
      {"sin(2x)", [](double t) { return std::sin(2.0 * t); }, [](double t) { return 2.0 * std::cos(2.0 * t); },
       [](double t) { return -4.0 * std::sin(2.0 * t); }},
  };
  for (const Case& c : cases) {
    const UnivariateWeight v = univariate_construct(c.f, c.fp, c.fpp);
    double err = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double t = -1.0 + 0.01 * i;
      err = std::max(err, std::abs(v.reconstruct(t) - c.f(t)));
    }
    report.at_most(std::string("univariate reconstruction sup error, f = ") + c.name, err, 1e-6);
  }

  Vector samples = sample_gaussian(1, 2000, Seed{41, 2}).col(0);
  const double w = w1_to_gaussian(samples);
  Vector reversed = samples.reverse();
  report.at_most("w1 permutation invariance", std::abs(w - w1_to_gaussian(reversed)), 0.0);
}

}  // namespace

std::vector<CheckResult> run_checks(const std::string& suite, const CheckOptions& options) {
  std::vector<CheckResult> out;
  const bool all = suite == "all";
  if (!all && suite != "gegenbauer" && suite != "kernel" && suite != "training" && suite != "analysis") {
    throw ConfigError("unknown suite '" + suite + "'");
  }
  if (all || suite == "gegenbauer") gegenbauer_suite(out);
  if (all || suite == "kernel") kernel_suite(out, options);
  if (all || suite == "training") training_suite(out);
  if (all || suite == "analysis") analysis_suite(out);
  return out;
}

void print_report(std::ostream& out, const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.suite << ": " << r.name << "  measured=" << r.measured << " "
        << r.relation << " " << r.threshold << "\n";
  }
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

}  // namespace featlab
