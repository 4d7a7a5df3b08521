#include "deepnmf/trainer.hpp"

#include "deepnmf/error.hpp"
#include "deepnmf/nnsvd.hpp"
#include "deepnmf/nonlinear.hpp"

#include <cmath>
#include <random>
#include <string>

namespace deepnmf {

void TrainConfig::validate() const {
  if (inner.max_iters < 1 || !(inner.grad_tol > 0.0)) {
    throw InvalidInput("train: inner stop needs max_iters >= 1 and grad_tol > 0");
  }
  if (outer.max_sweeps < 1 || !(outer.rel_obj_tol > 0.0)) {
    throw InvalidInput("train: outer stop needs max_sweeps >= 1 and rel_obj_tol > 0");
  }
  if (!(init_jitter >= 0.0) || init_jitter >= 1.0) {
    throw InvalidInput("train: init_jitter must be in [0, 1)");
  }
}

double objective_slack(double previous, double data_norm_sq) noexcept {
  return 1e-10 * std::abs(previous) + 1e-13 * data_norm_sq;
}

bool objective_converged(double previous, double current, double rel_tol) noexcept {
  if (current == 0.0) return true;
  return std::abs(previous - current) <= rel_tol * std::abs(previous);
}

namespace {

void jitter(DenseMatrix& m, double amount, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) *= 1.0 + amount * u(rng);
  }
}

}  // namespace

LayerFit fit_layer(const ModelSpec& spec, std::size_t layer,
                   const NonnegMatrix& input, const TrainConfig& cfg) {
  InitPair init = nnsvd_init(input, spec.layer_sizes.at(layer));
  DenseMatrix w0 = init.w.mat();
  DenseMatrix h0 = init.h.mat();
  if (cfg.init_jitter > 0.0) {
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + layer + 1);
    jitter(w0, cfg.init_jitter, rng);
    jitter(h0, cfg.init_jitter, rng);
  }
  LayerFit fit{NonnegMatrix::adopt(std::move(w0)),
               NonnegMatrix::adopt(std::move(h0)), {}};

  const double data_sq = input.mat().squaredNorm();
  double obj = layer_objective(spec, layer, input, fit.w, fit.h);
  fit.objective_trace.push_back(obj);

  for (int t = 0; t < cfg.outer.max_sweeps; ++t) {
    NonnegMatrix w_prev = fit.w;
    NonnegMatrix h_prev = fit.h;

    fit.h = apg_solve(fit.h,
                      pretrain_problem(spec, layer, Role::H, input, fit.w, fit.h),
                      cfg.inner)
                .solution;
    fit.w = apg_solve(fit.w,
                      pretrain_problem(spec, layer, Role::W, input, fit.w, fit.h),
                      cfg.inner)
                .solution;

    const double next = layer_objective(spec, layer, input, fit.w, fit.h);
    if (!std::isfinite(next)) {
      throw NumericalError("pretrain: non-finite objective at layer " +
                           std::to_string(layer + 1));
    }
    if (next > obj) {
      if (next - obj > objective_slack(obj, data_sq)) {
        throw InternalError("pretrain: layer objective increased from " +
                            std::to_string(obj) + " to " + std::to_string(next));
      }
      // Round-off level increase: keep the previous pair and stop.
      fit.w = std::move(w_prev);
      fit.h = std::move(h_prev);
      break;
    }
    fit.objective_trace.push_back(next);
    const bool done = objective_converged(obj, next, cfg.outer.rel_obj_tol);
    obj = next;
    if (done) break;
  }
  return fit;
}

PretrainResult pretrain(const ModelSpec& spec, const NonnegMatrix& x,
                        const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  PretrainResult out;
  NonnegMatrix input = x;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    LayerFit fit = fit_layer(spec, l, input, cfg);
    input = fit.h;
    out.stack.w.push_back(std::move(fit.w));
    out.stack.h.push_back(std::move(fit.h));
    out.layer_traces.push_back(std::move(fit.objective_trace));
  }
  out.stack.refresh_psi();
  return out;
}

namespace {

// Keeps the whole-system objective non-increasing across block updates:
// accepts a candidate if the objective did not grow, reverts round-off level
// growth, and treats anything larger as a bug.
class DescentGuard {
 public:
  DescentGuard(const ModelSpec& spec, const NonnegMatrix& x, double start)
      : spec_(spec), x_(x), data_sq_(x.mat().squaredNorm()), current_(start) {}

  double current() const noexcept { return current_; }

  // `slot` already holds the candidate; `previous` is restored on rejection.
  void settle(FactorStack& stack, NonnegMatrix& slot, NonnegMatrix previous,
              const char* what, std::size_t layer) {
    const double next = objective(spec_, x_, stack);
    if (!std::isfinite(next)) {
      throw NumericalError(std::string("finetune: non-finite objective after ") +
                           what + std::to_string(layer + 1));
    }
    if (next <= current_) {
      current_ = next;
      return;
    }
    if (next - current_ > objective_slack(current_, data_sq_)) {
      throw InternalError(std::string("finetune: objective increased after ") +
                          what + std::to_string(layer + 1) + " (" +
                          std::to_string(current_) + " -> " +
                          std::to_string(next) + ")");
    }
    slot = std::move(previous);
  }

 private:
  const ModelSpec& spec_;
  const NonnegMatrix& x_;
  double data_sq_;
  double current_;
};

}  // namespace

FinetuneResult finetune(const ModelSpec& spec, const NonnegMatrix& x,
                        FactorStack stack, const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (spec.is_nonlinear()) {
    throw InvalidInput("finetune: nonlinear specs use nonlinear_finetune");
  }
  stack.check(spec, x.rows(), x.cols());
  stack.refresh_psi();

  FinetuneResult out;
  TrainReport& report = out.report;
  DescentGuard guard(spec, x, objective(spec, x, stack));
  report.objective_trace.push_back(guard.current());

  const std::size_t depth = spec.depth();
  for (int sweep = 0; sweep < cfg.outer.max_sweeps; ++sweep) {
    const double before = guard.current();
    for (std::size_t l = 0; l < depth; ++l) {
      {
        ApgProblem prob = finetune_problem(spec, l, Role::W, x, stack);
        NonnegMatrix previous = stack.w[l];
        stack.w[l] = apg_solve(stack.w[l], prob, cfg.inner).solution;
        guard.settle(stack, stack.w[l], std::move(previous), "W", l);
        stack.refresh_psi();
      }
      {
        ApgProblem prob = finetune_problem(spec, l, Role::H, x, stack);
        NonnegMatrix previous = stack.h[l];
        stack.h[l] = apg_solve(stack.h[l], prob, cfg.inner).solution;
        // Only the top H enters the objective.
        if (l + 1 == depth) {
          guard.settle(stack, stack.h[l], std::move(previous), "H", l);
        }
      }
    }
    report.sweeps_used = sweep + 1;
    if (cfg.record_trace || sweep + 1 == cfg.outer.max_sweeps) {
      report.objective_trace.push_back(guard.current());
    }
    if (objective_converged(before, guard.current(), cfg.outer.rel_obj_tol)) {
      break;
    }
  }
  if (report.objective_trace.back() != guard.current()) {
    report.objective_trace.push_back(guard.current());
  }
  report.final_objective = guard.current();
  out.stack = std::move(stack);
  return out;
}

TrainResult train(const ModelSpec& spec, const NonnegMatrix& x,
                  const TrainConfig& cfg) {
  spec.validate();
  PretrainResult pre =
      spec.is_nonlinear() ? nonlinear_pretrain(spec, x, cfg) : pretrain(spec, x, cfg);
  TrainResult out;
  out.pretrain_objective = objective(spec, x, pre.stack);
  FinetuneResult fine = spec.is_nonlinear()
                            ? nonlinear_finetune(spec, x, std::move(pre.stack), cfg)
                            : finetune(spec, x, std::move(pre.stack), cfg);
  out.stack = std::move(fine.stack);
  out.report = std::move(fine.report);
  out.report.per_layer_pretrain_objectives = std::move(pre.layer_traces);
  return out;
}

}  // namespace deepnmf
