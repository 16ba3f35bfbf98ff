#pragma once

#include "featlab/types.hpp"

namespace featlab {

enum class Stage { init, post_stage1, post_stage2 };

/// Parameters theta = (a, W, b, V) of the three-layer network
///   f(x; theta) = (1/m1) a^T relu(W sigma2(V x) + b).
/// V and b are drawn once and never change during training.
struct NetworkState {
  Vector a;  // m1
  Matrix W;  // m1 x m2
  Vector b;  // m1
  Matrix V;  // m2 x d
  Stage stage = Stage::init;

  int input_dim() const { return static_cast<int>(V.cols()); }
  int outer_width() const { return static_cast<int>(a.size()); }
  int inner_width() const { return static_cast<int>(V.rows()); }
};

}  // namespace featlab
