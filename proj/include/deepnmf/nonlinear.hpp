#pragma once

#include "deepnmf/activation.hpp"
#include "deepnmf/model.hpp"
#include "deepnmf/trainer.hpp"

#include <vector>

namespace deepnmf {

// Layer-wise pretraining where every H_l (l < L) is passed through the
// activation before it becomes the next layer's input. The stack stores the
// solved (unprojected) H_l; see representation() for the Square2 projection
// of the top layer.
//
// Throws InvalidInput for a linear spec.
PretrainResult nonlinear_pretrain(const ModelSpec& spec, const NonnegMatrix& x,
                                  const TrainConfig& cfg);

// Chain-rule gradients of the nonlinear objective (penalties included).
// A linear spec is treated as g = identity. A stack whose shapes do not
// chain raises InternalError.
struct NonlinearGradients {
  std::vector<DenseMatrix> w;  // d f / d W_l for every layer
  DenseMatrix h_top;           // d f / d H_L
};
NonlinearGradients nonlinear_gradients(const ModelSpec& spec,
                                       const NonnegMatrix& x,
                                       const FactorStack& stack);

// Single block of the above: Role::H requires the top layer.
DenseMatrix nonlinear_finetune_gradients(const ModelSpec& spec,
                                         const NonnegMatrix& x,
                                         const FactorStack& stack, Role role,
                                         std::size_t layer);

inline constexpr double kArmijoC = 1e-4;
inline constexpr int kMaxHalvings = 50;

// Per sweep: H_L and W_l (l >= 2) by projected gradient with Armijo
// backtracking, hidden H_l reset to the projection of g^{-1}(W_{l+1} H_{l+1}),
// then W_1 by the accelerated solver on its convex block.
FinetuneResult nonlinear_finetune(const ModelSpec& spec, const NonnegMatrix& x,
                                  FactorStack stack, const TrainConfig& cfg);

// The representation used downstream (clustering): H_L, or g(H_L) when the
// spec projects every layer (Square2).
NonnegMatrix representation(const ModelSpec& spec, const FactorStack& stack);

}  // namespace deepnmf
