#pragma once

#include "deepnmf/apg.hpp"
#include "deepnmf/model.hpp"

#include <cstdint>
#include <vector>

namespace deepnmf {

struct OuterStop {
  int max_sweeps = 200;
  double rel_obj_tol = 1e-6;
};

struct TrainConfig {
  StopRule inner;
  OuterStop outer;
  std::uint64_t seed = 0;
  bool record_trace = true;
  // Multiplicative jitter applied to the NNSVD seed, entries scaled by
  // (1 + init_jitter * U(-1, 1)). Zero keeps the initialization pure.
  double init_jitter = 0.0;

  void validate() const;
};

struct TrainReport {
  std::vector<double> objective_trace;  // entry 0 is the starting objective
  double final_objective = 0.0;
  int sweeps_used = 0;
  std::vector<std::vector<double>> per_layer_pretrain_objectives;
  // Nonlinear fine-tuning only: a line search gave up.
  bool stalled = false;
};

struct LayerFit {
  NonnegMatrix w;
  NonnegMatrix h;
  std::vector<double> objective_trace;
};

// One pretraining layer: NNSVD seed, then alternate H and W block solves until
// the relative objective change falls below the outer tolerance.
LayerFit fit_layer(const ModelSpec& spec, std::size_t layer,
                   const NonnegMatrix& input, const TrainConfig& cfg);

struct PretrainResult {
  FactorStack stack;
  std::vector<std::vector<double>> layer_traces;
};

// Greedy layer-wise pretraining; H_l feeds layer l+1.
PretrainResult pretrain(const ModelSpec& spec, const NonnegMatrix& x,
                        const TrainConfig& cfg);

struct FinetuneResult {
  FactorStack stack;
  TrainReport report;
};

// Whole-system block-coordinate sweeps (layers bottom-up, W before H).
// The objective trace is non-increasing; an increase beyond round-off slack
// raises InternalError.
FinetuneResult finetune(const ModelSpec& spec, const NonnegMatrix& x,
                        FactorStack stack, const TrainConfig& cfg);

// pretrain + finetune, picking the nonlinear path for a nonlinear ModelSpec.
struct TrainResult {
  FactorStack stack;
  TrainReport report;
  double pretrain_objective = 0.0;
};
TrainResult train(const ModelSpec& spec, const NonnegMatrix& x,
                  const TrainConfig& cfg);

// Allowed round-off growth of the objective between two evaluations.
double objective_slack(double previous, double data_norm_sq) noexcept;

bool objective_converged(double previous, double current, double rel_tol) noexcept;

}  // namespace deepnmf
