#pragma once

#include "deepnmf/activation.hpp"
#include "deepnmf/apg.hpp"
#include "deepnmf/linalg.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace deepnmf {

enum class Variant { DNMF, SDNMF_L, SDNMF_R, SDNMF_RL1, SDNMF_RL2 };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant v) noexcept;

enum class Phase { pretrain, finetune };
enum class Role { W, H };

// Penalty on an H block: none, 1/2 lambda sum_j ||H(:,j)||_1^2 (ones-gram), or
// 1/2 lambda ||H||_F^2 (identity).
struct HPenalty {
  enum class Kind { none, ones, identity };
  Kind kind = Kind::none;
  double weight = 0.0;
};

inline constexpr double kDefaultPenalty = 0.1;

// Layers are 0-based in code: layer l here is W_{l+1}, H_{l+1} in the usual
// 1-based notation.
struct ModelSpec {
  Variant variant = Variant::DNMF;
  std::vector<Index> layer_sizes;
  std::vector<double> mu;      // W column-L1 weights, one per layer
  std::vector<double> lambda;  // H weights, one per layer
  ActivationKind activation = ActivationKind::linear;
  ProjectionMode projection = ProjectionMode::none;

  std::size_t depth() const noexcept { return layer_sizes.size(); }
  bool is_nonlinear() const noexcept {
    return activation != ActivationKind::linear;
  }

  // Throws InvalidInput when the ModelSpec is malformed.
  void validate() const;
  // Soft issues (e.g. layer sizes that grow with depth).
  std::vector<std::string> warnings() const;

  // Effective weights: zero wherever the variant ignores the parameter.
  double w_penalty(std::size_t layer) const;
  HPenalty h_penalty(std::size_t layer, Phase phase) const;
};

// Builds a spec with a single mu/lambda broadcast to every layer.
ModelSpec make_spec(Variant variant, std::vector<Index> layer_sizes,
                    double mu = kDefaultPenalty, double lambda = kDefaultPenalty);

struct FactorStack {
  std::vector<NonnegMatrix> w;  // W_l is k_{l-1} x k_l, k_{-1} = m
  std::vector<NonnegMatrix> h;  // H_l is k_l x n
  // psi[l] = W_0 W_1 ... W_l when cached.
  std::vector<DenseMatrix> psi;

  std::size_t depth() const noexcept { return w.size(); }

  void refresh_psi();
  bool psi_valid(double rel_tol = 1e-12) const;

  // Recomputed W_0 ... W_l (no cache).
  DenseMatrix cumulative_basis(std::size_t layer) const;
  // Reconstruction of H_l from the layers above: H_L for the top layer,
  // W_{l+1} * reconstruction(l+1) below it.
  DenseMatrix h_tilde(std::size_t layer) const;

  // Throws InvalidInput if shapes do not chain for spec and an m x n input.
  void check(const ModelSpec& spec, Index m, Index n) const;
};

// 1/2 sum_j (sum_i M(i,j))^2, i.e. 1/2 tr((xi M)^T (xi M)).
double ones_penalty(const DenseMatrix& m) noexcept;
// Rows all equal to the column sums of m: xi^T xi m without forming xi^T xi.
DenseMatrix ones_gram_times(const DenseMatrix& m);

double h_penalty_value(const HPenalty& pen, const DenseMatrix& h);

// Model reconstruction: W_0 ... W_{L-1} H_{L-1} for linear specs,
// W_0 g^{-1}(W_1 g^{-1}(... g^{-1}(W_{L-1} H_{L-1}))) otherwise.
DenseMatrix reconstruct(const ModelSpec& spec, const FactorStack& stack);

// Whole-system objective: half the squared reconstruction error plus the
// variant's penalties (every W_l, and the top H for R/RL1/RL2).
double objective(const ModelSpec& spec, const NonnegMatrix& x,
                 const FactorStack& stack);

// Objective of a single pretraining layer fitting input ~ W H.
double layer_objective(const ModelSpec& spec, std::size_t layer,
                       const DenseMatrix& input, const DenseMatrix& w,
                       const DenseMatrix& h);

// min_W 1/2 ||target - left W right||^2 + 1/2 mu sum_j ||W(:,j)||_1^2.
// `left` may be null (identity).
ApgProblem w_block_problem(const DenseMatrix& target, const DenseMatrix* left,
                           const DenseMatrix& right, double mu);

// min_H 1/2 ||target - left H||^2 + penalty(H).
ApgProblem h_block_problem(const DenseMatrix& target, const DenseMatrix& left,
                           const HPenalty& penalty);

// Layer-wise pretraining block on input H_{l-1} (X for layer 0).
ApgProblem pretrain_problem(const ModelSpec& spec, std::size_t layer, Role role,
                            const DenseMatrix& input, const NonnegMatrix& w_cur,
                            const NonnegMatrix& h_cur);

// Whole-system fine-tuning block. Uses stack.psi when present (it must be
// current: stale caches raise InternalError), otherwise recomputes.
ApgProblem finetune_problem(const ModelSpec& spec, std::size_t layer, Role role,
                            const NonnegMatrix& x, const FactorStack& stack);

}  // namespace deepnmf
