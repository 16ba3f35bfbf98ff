#include "featlab/sampling.hpp"

#include <cmath>
#include <string>

#include "featlab/errors.hpp"

namespace featlab {

namespace {

void fill_normal(Matrix& m, std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  // Row-major fill so that sample i depends only on the first i rows of draws.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(engine);
  }
}

void require_positive(int value, const char* what) {
  if (value < 1) {
    throw InvalidDimension(std::string(what) + " must be >= 1, got " + std::to_string(value));
  }
}

}  // namespace

std::mt19937_64 make_engine(const Seed& seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.value),
                    static_cast<std::uint32_t>(seed.value >> 32),
                    static_cast<std::uint32_t>(seed.stream_id),
                    static_cast<std::uint32_t>(seed.stream_id >> 32)};
  return std::mt19937_64(seq);
}

Matrix sample_sphere(int d, double radius, int n, const Seed& seed) {
  if (d < 2) throw InvalidDimension("sample_sphere needs d >= 2, got " + std::to_string(d));
  require_positive(n, "n");
  if (!(radius > 0.0)) throw std::invalid_argument("sample_sphere needs radius > 0");
  auto engine = make_engine(seed);
  Matrix points(n, d);
  fill_normal(points, engine);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double norm = points.row(i).norm();
    while (norm == 0.0) {  // probability zero, but keep the row well defined
      Matrix redraw(1, d);
      fill_normal(redraw, engine);
      points.row(i) = redraw;
      norm = points.row(i).norm();
    }
    points.row(i) *= radius / norm;
  }
  return points;
}

Matrix sample_gaussian(int d, int n, const Seed& seed) {
  require_positive(d, "d");
  require_positive(n, "n");
  auto engine = make_engine(seed);
  Matrix points(n, d);
  fill_normal(points, engine);
  return points;
}

Matrix sample_points(Distribution distribution, int d, int n, const Seed& seed) {
  if (distribution == Distribution::std_gaussian) return sample_gaussian(d, n, seed);
  return sample_sphere(d, std::sqrt(static_cast<double>(d)), n, seed);
}

NetworkState sample_init(int d, int m1, int m2, const Seed& seed) {
  require_positive(d, "d");
  require_positive(m1, "m1");
  require_positive(m2, "m2");
  NetworkState theta;
  auto engine = make_engine(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  theta.a.resize(m1);
  for (int j = 0; j < m1; ++j) theta.a[j] = coin(engine) ? 1.0 : -1.0;
  theta.b.resize(m1);
  for (int j = 0; j < m1; ++j) theta.b[j] = normal(engine);
  theta.W = Matrix::Zero(m1, m2);
  if (d >= 2) {
    theta.V = sample_sphere(d, 1.0, m2, seed.stream(seed.stream_id ^ 0x9e3779b97f4a7c15ULL));
  } else {
    // The unit sphere in R^1 is {-1, +1}.
    theta.V.resize(m2, 1);
    for (int j = 0; j < m2; ++j) theta.V(j, 0) = coin(engine) ? 1.0 : -1.0;
  }
  theta.stage = Stage::init;
  return theta;
}

Matrix random_orthogonal(int d, const Seed& seed) {
  require_positive(d, "d");
  auto engine = make_engine(seed);
  Matrix g(d, d);
  fill_normal(g, engine);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix so the result is Haar distributed.
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix random_symmetric_traceless(int d, SymmetricKind kind, const Seed& seed) {
  if (d < 2) throw InvalidDimension("random_symmetric_traceless needs d >= 2");
  if (kind == SymmetricKind::gauss_sym) {
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        a(i, j) = normal(engine);
        a(j, i) = a(i, j);
      }
    }
    return a;
  }
  if (d % 2 != 0) {
    throw InvalidDimension("projection_half needs even d, got " + std::to_string(d));
  }
  const Matrix q = random_orthogonal(d, seed);
  const auto basis = q.leftCols(d / 2);
  Matrix p = basis * basis.transpose();
  // Exact symmetry.
  p = 0.5 * (p + p.transpose()).eval();
  return p;
}

}  // namespace featlab
