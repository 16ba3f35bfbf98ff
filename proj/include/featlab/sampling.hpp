#pragma once

#include <cstdint>
#include <random>

#include "featlab/network_state.hpp"
#include "featlab/types.hpp"

namespace featlab {

/// Seed plus sub-stream index. Identical pairs give identical sample sequences.
struct Seed {
  std::uint64_t value = 0;
  std::uint64_t stream_id = 0;

  Seed stream(std::uint64_t id) const { return {value, id}; }
  friend bool operator==(const Seed&, const Seed&) = default;
};

std::mt19937_64 make_engine(const Seed& seed);

enum class Distribution { sphere_sqrt_d, std_gaussian };

struct Dataset {
  Matrix points;  // n x d
  Vector labels;  // n
  Distribution distribution = Distribution::sphere_sqrt_d;

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// n i.i.d. points uniform on the sphere of the given radius in R^d (normalized Gaussians).
Matrix sample_sphere(int d, double radius, int n, const Seed& seed);

/// n i.i.d. standard Gaussian points in R^d.
Matrix sample_gaussian(int d, int n, const Seed& seed);

/// Covariates from the law used by a setting: sphere of radius sqrt(d) or N(0, I).
Matrix sample_points(Distribution distribution, int d, int n, const Seed& seed);

/// a ~ Unif{+-1}, W = 0, b ~ N(0,1), rows of V uniform on the unit sphere.
NetworkState sample_init(int d, int m1, int m2, const Seed& seed);

/// Haar-distributed orthogonal d x d matrix.
Matrix random_orthogonal(int d, const Seed& seed);

enum class SymmetricKind { gauss_sym, projection_half };

/// Raw (un-normalized) symmetric matrix: symmetrized Gaussian, or the orthogonal
/// projector onto a random d/2-dimensional subspace.
Matrix random_symmetric_traceless(int d, SymmetricKind kind, const Seed& seed);

}  // namespace featlab
