#include "deepnmf/activation.hpp"

#include "deepnmf/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace deepnmf {

ActivationKind parse_activation(std::string_view name) {
  if (name == "linear" || name == "none") return ActivationKind::linear;
  if (name == "identity") return ActivationKind::identity;
  if (name == "root" || name == "sqrt") return ActivationKind::root;
  if (name == "tanh") return ActivationKind::tanh_act;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  if (name == "softplus") return ActivationKind::softplus;
  throw InvalidInput("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(ActivationKind kind) noexcept {
  switch (kind) {
    case ActivationKind::linear: return "linear";
    case ActivationKind::identity: return "identity";
    case ActivationKind::root: return "root";
    case ActivationKind::tanh_act: return "tanh";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::softplus: return "softplus";
  }
  return "?";
}

ProjectionMode parse_projection(std::string_view name) {
  if (name == "none") return ProjectionMode::none;
  if (name == "square1") return ProjectionMode::square1;
  if (name == "square2") return ProjectionMode::square2;
  throw InvalidInput("unknown projection mode '" + std::string(name) + "'");
}

std::string_view to_string(ProjectionMode mode) noexcept {
  switch (mode) {
    case ProjectionMode::none: return "none";
    case ProjectionMode::square1: return "square1";
    case ProjectionMode::square2: return "square2";
  }
  return "?";
}

Activation::Activation(ActivationKind kind) : kind_(kind) {
  if (kind == ActivationKind::linear) {
    throw InvalidInput("linear is not an elementwise activation");
  }
}

double Activation::forward(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::identity: return x;
    case ActivationKind::root: return std::sqrt(std::max(x, 0.0));
    case ActivationKind::tanh_act: return std::tanh(x);
    case ActivationKind::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::softplus:
      // log(1 + e^x) without overflow.
      return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    case ActivationKind::linear: break;
  }
  return x;
}

double Activation::inverse(double y) const noexcept {
  constexpr double eps = kActivationClampEps;
  switch (kind_) {
    case ActivationKind::identity: return y;
    case ActivationKind::root: return y * y;
    case ActivationKind::tanh_act:
      return std::atanh(std::clamp(y, -1.0 + eps, 1.0 - eps));
    case ActivationKind::sigmoid: {
      const double c = std::clamp(y, eps, 1.0 - eps);
      return std::log(c / (1.0 - c));
    }
    case ActivationKind::softplus: {
      const double c = std::max(y, eps);
      // log(e^c - 1) = c + log(1 - e^{-c})
      return c + std::log(-std::expm1(-c));
    }
    case ActivationKind::linear: break;
  }
  return y;
}

double Activation::inverse_deriv(double y) const noexcept {
  constexpr double eps = kActivationClampEps;
  switch (kind_) {
    case ActivationKind::identity: return 1.0;
    case ActivationKind::root: return 2.0 * y;
    case ActivationKind::tanh_act:
      if (y < -1.0 + eps || y > 1.0 - eps) return 0.0;
      return 1.0 / (1.0 - y * y);
    case ActivationKind::sigmoid:
      if (y < eps || y > 1.0 - eps) return 0.0;
      return 1.0 / (y * (1.0 - y));
    case ActivationKind::softplus:
      if (y < eps) return 0.0;
      return -1.0 / std::expm1(-y);
    case ActivationKind::linear: break;
  }
  return 1.0;
}

DenseMatrix Activation::forward(const DenseMatrix& m) const {
  return m.unaryExpr([this](double v) { return forward(v); });
}

DenseMatrix Activation::inverse(const DenseMatrix& m) const {
  return m.unaryExpr([this](double v) { return inverse(v); });
}

DenseMatrix Activation::inverse_deriv(const DenseMatrix& m) const {
  return m.unaryExpr([this](double v) { return inverse_deriv(v); });
}

NonnegMatrix apply_activation(const Activation& act, const NonnegMatrix& h) {
  DenseMatrix out = act.forward(h.mat());
  project_nonneg_inplace(out);
  return NonnegMatrix::adopt(std::move(out));
}

}  // namespace deepnmf
