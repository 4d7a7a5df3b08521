#pragma once

#include "deepnmf/linalg.hpp"

#include <string_view>

namespace deepnmf {

// `linear` selects the linear model path; `identity` is g(x) = x routed
// through the nonlinear machinery (useful for cross-checking the two paths).
enum class ActivationKind { linear, identity, root, tanh_act, sigmoid, softplus };

// Square1: project hidden representations H_1..H_{L-1} only.
// Square2: additionally project the final representation H_L.
enum class ProjectionMode { none, square1, square2 };

ActivationKind parse_activation(std::string_view name);
std::string_view to_string(ActivationKind kind) noexcept;
ProjectionMode parse_projection(std::string_view name);
std::string_view to_string(ProjectionMode mode) noexcept;

inline constexpr double kActivationClampEps = 1e-7;

// Elementwise g, its reconstruction map g^{-1} and the derivative of g^{-1}.
// Inverse maps clamp their argument into the open domain; the derivative is
// zero where the clamp is active.
class Activation {
 public:
  explicit Activation(ActivationKind kind);

  ActivationKind kind() const noexcept { return kind_; }

  double forward(double x) const noexcept;
  double inverse(double y) const noexcept;
  double inverse_deriv(double y) const noexcept;

  DenseMatrix forward(const DenseMatrix& m) const;
  DenseMatrix inverse(const DenseMatrix& m) const;
  DenseMatrix inverse_deriv(const DenseMatrix& m) const;

 private:
  ActivationKind kind_;
};

// Elementwise g on a nonnegative matrix; the result is nonnegative.
NonnegMatrix apply_activation(const Activation& act, const NonnegMatrix& h);

}  // namespace deepnmf
