#include "featlab/activation.hpp"

#include <cmath>
#include <sstream>

#include "featlab/errors.hpp"

namespace featlab {

Activation Activation::identity() { return {Kind::identity, "identity", {}}; }

Activation Activation::relu() { return {Kind::relu, "relu", {}}; }

Activation Activation::custom(std::string name, std::function<double(double)> fn) {
  if (!fn) throw std::invalid_argument("custom activation needs a callable");
  return {Kind::custom, std::move(name), std::move(fn)};
}

Activation Activation::parse(std::string_view name) {
  if (name == "identity") return identity();
  if (name == "relu") return relu();
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Link Link::sigmoid() { return {Kind::sigmoid, 0.0}; }
Link Link::cube() { return {Kind::cube, 0.0}; }
Link Link::relu() { return {Kind::relu, 0.0}; }
Link Link::identity() { return {Kind::identity, 0.0}; }

Link Link::smoothed_relu(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("smoothed_relu needs eps > 0");
  return {Kind::smoothed_relu, eps};
}

Link Link::custom(std::string name, std::function<double(double)> g,
                  std::function<double(double)> g_prime) {
  if (!g || !g_prime) throw std::invalid_argument("custom link needs g and g'");
  Link link(Kind::custom, 0.0);
  link.custom_name_ = std::move(name);
  link.g_ = std::move(g);
  link.g_prime_ = std::move(g_prime);
  return link;
}

Link Link::parse(std::string_view text) {
  if (text == "sigmoid") return sigmoid();
  if (text == "cube") return cube();
  if (text == "relu") return relu();
  if (text == "identity") return identity();
  constexpr std::string_view prefix = "smoothed_relu:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string value(text.substr(prefix.size()));
    std::size_t used = 0;
    double eps = 0.0;
    try {
      eps = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || !(eps > 0.0)) {
      throw ConfigError("bad smoothed_relu epsilon '" + value + "'");
    }
    return smoothed_relu(eps);
  }
  throw ConfigError("unknown link '" + std::string(text) + "'");
}

std::string Link::name() const {
  switch (kind_) {
    case Kind::sigmoid:
      return "sigmoid";
    case Kind::cube:
      return "cube";
    case Kind::relu:
      return "relu";
    case Kind::identity:
      return "identity";
    case Kind::smoothed_relu: {
      std::ostringstream out;
      out.precision(17);
      out << "smoothed_relu:" << eps_;
      return out.str();
    }
    case Kind::custom:
      return custom_name_;
  }
  return {};
}

double Link::operator()(double z) const {
  switch (kind_) {
    case Kind::sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case Kind::cube:
      return z * z * z;
    case Kind::relu:
      return z > 0.0 ? z : 0.0;
    case Kind::identity:
      return z;
    case Kind::smoothed_relu:
      if (z <= -eps_) return 0.0;
      if (z >= eps_) return z;
      return (z + eps_) * (z + eps_) / (4.0 * eps_);
    case Kind::custom:
      return g_(z);
  }
  return 0.0;
}

double Link::derivative(double z) const {
  switch (kind_) {
    case Kind::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Kind::cube:
      return 3.0 * z * z;
    case Kind::relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Kind::identity:
      return 1.0;
    case Kind::smoothed_relu:
      if (z <= -eps_) return 0.0;
      if (z >= eps_) return 1.0;
      return (z + eps_) / (2.0 * eps_);
    case Kind::custom:
      return g_prime_(z);
  }
  return 0.0;
}

double Link::second_derivative(double z) const {
  switch (kind_) {
    case Kind::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case Kind::cube:
      return 6.0 * z;
    case Kind::relu:
    case Kind::identity:
      return 0.0;
    case Kind::smoothed_relu:
      return std::abs(z) < eps_ ? 1.0 / (2.0 * eps_) : 0.0;
    case Kind::custom: {
      const double h = 1e-5;
      return (g_prime_(z + h) - g_prime_(z - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

}  // namespace featlab
