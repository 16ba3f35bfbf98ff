#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "featlab/types.hpp"

namespace featlab {

/// Inner activation sigma_2 applied to the random projections Vx.
class Activation {
 public:
  enum class Kind { identity, relu, custom };

  static Activation identity();
  static Activation relu();
  static Activation custom(std::string name, std::function<double(double)> fn);
  /// Accepts "identity" or "relu".
  static Activation parse(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  double operator()(double z) const {
    switch (kind_) {
      case Kind::identity:
        return z;
      case Kind::relu:
        return z > 0.0 ? z : 0.0;
      case Kind::custom:
        break;
    }
    return fn_(z);
  }

  template <typename Derived>
  Matrix apply(const Eigen::MatrixBase<Derived>& z) const {
    switch (kind_) {
      case Kind::identity:
        return z;
      case Kind::relu:
        return z.cwiseMax(0.0);
      case Kind::custom:
        break;
    }
    return z.unaryExpr(fn_);
  }

 private:
  Activation(Kind kind, std::string name, std::function<double(double)> fn)
      : kind_(kind), name_(std::move(name)), fn_(std::move(fn)) {}

  Kind kind_;
  std::string name_;
  std::function<double(double)> fn_;
};

/// Outer link g* of a hierarchical target, together with its derivative.
class Link {
 public:
  enum class Kind { sigmoid, cube, relu, smoothed_relu, identity, custom };

  static Link sigmoid();
  static Link cube();
  static Link relu();
  /// Quadratic on [-eps, eps], zero to the left, identity to the right.
  static Link smoothed_relu(double eps);
  static Link identity();
  static Link custom(std::string name, std::function<double(double)> g,
                     std::function<double(double)> g_prime);
  /// "sigmoid", "cube", "relu", "identity" or "smoothed_relu:<eps>".
  static Link parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  double epsilon() const noexcept { return eps_; }
  std::string name() const;

  double operator()(double z) const;
  double derivative(double z) const;
  double second_derivative(double z) const;

 private:
  Link(Kind kind, double eps) : kind_(kind), eps_(eps) {}

  Kind kind_;
  double eps_ = 0.0;
  std::string custom_name_;
  std::function<double(double)> g_;
  std::function<double(double)> g_prime_;
};

}  // namespace featlab
