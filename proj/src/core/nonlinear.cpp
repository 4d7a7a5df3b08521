#include "deepnmf/nonlinear.hpp"

#include "deepnmf/error.hpp"

#include <cmath>
#include <string>

namespace deepnmf {

namespace {

ActivationKind effective_kind(const ModelSpec& spec) {
  return spec.is_nonlinear() ? spec.activation : ActivationKind::identity;
}

}  // namespace

PretrainResult nonlinear_pretrain(const ModelSpec& spec, const NonnegMatrix& x,
                                  const TrainConfig& cfg) {
  if (!spec.is_nonlinear()) {
    throw InvalidInput("nonlinear_pretrain: spec has a linear activation");
  }
  spec.validate();
  cfg.validate();
  const Activation act(spec.activation);

  PretrainResult out;
  NonnegMatrix input = x;
  for (std::size_t l = 0; l < spec.depth(); ++l) {
    LayerFit fit = fit_layer(spec, l, input, cfg);
    if (l + 1 < spec.depth()) input = apply_activation(act, fit.h);
    out.stack.w.push_back(std::move(fit.w));
    out.stack.h.push_back(std::move(fit.h));
    out.layer_traces.push_back(std::move(fit.objective_trace));
  }
  out.stack.refresh_psi();
  return out;
}

NonlinearGradients nonlinear_gradients(const ModelSpec& spec,
                                       const NonnegMatrix& x,
                                       const FactorStack& stack) {
  try {
    stack.check(spec, x.rows(), x.cols());
  } catch (const InvalidInput& e) {
    // Callers hand over stacks they built themselves; a broken chain is ours.
    throw InternalError(std::string("nonlinear gradient: ") + e.what());
  }
  const Activation act(effective_kind(spec));
  const std::size_t depth = stack.depth();

  // Forward: inputs[l] is what W_l multiplies; pre[l] = W_l * inputs[l].
  std::vector<DenseMatrix> inputs(depth), pre(depth);
  inputs[depth - 1] = stack.h.back().mat();
  for (std::size_t l = depth - 1; l > 0; --l) {
    pre[l] = stack.w[l].mat() * inputs[l];
    inputs[l - 1] = act.inverse(pre[l]);
  }
  const DenseMatrix residual = stack.w[0].mat() * inputs[0] - x.mat();

  NonlinearGradients g;
  g.w.resize(depth);
  g.w[0] = residual * inputs[0].transpose();
  DenseMatrix upstream = stack.w[0].mat().transpose() * residual;
  for (std::size_t l = 1; l < depth; ++l) {
    const DenseMatrix delta =
        upstream.cwiseProduct(act.inverse_deriv(pre[l]));
    g.w[l] = delta * inputs[l].transpose();
    upstream = stack.w[l].mat().transpose() * delta;
  }
  g.h_top = std::move(upstream);

  for (std::size_t l = 0; l < depth; ++l) {
    const double mu = spec.w_penalty(l);
    if (mu != 0.0) g.w[l] += mu * ones_gram_times(stack.w[l].mat());
  }
  const HPenalty pen = spec.h_penalty(depth - 1, Phase::finetune);
  if (pen.kind == HPenalty::Kind::ones) {
    g.h_top += pen.weight * ones_gram_times(stack.h.back().mat());
  } else if (pen.kind == HPenalty::Kind::identity) {
    g.h_top += pen.weight * stack.h.back().mat();
  }
  return g;
}

DenseMatrix nonlinear_finetune_gradients(const ModelSpec& spec,
                                         const NonnegMatrix& x,
                                         const FactorStack& stack, Role role,
                                         std::size_t layer) {
  if (layer >= stack.depth()) {
    throw InvalidInput("nonlinear gradient: layer out of range");
  }
  if (role == Role::H && layer + 1 != stack.depth()) {
    throw InvalidInput("nonlinear gradient: only the top H is a free block");
  }
  NonlinearGradients g = nonlinear_gradients(spec, x, stack);
  return role == Role::H ? std::move(g.h_top) : std::move(g.w[layer]);
}

NonnegMatrix representation(const ModelSpec& spec, const FactorStack& stack) {
  if (spec.is_nonlinear() && spec.projection == ProjectionMode::square2) {
    return apply_activation(Activation(spec.activation), stack.h.back());
  }
  return stack.h.back();
}

namespace {

struct BlockRef {
  Role role;
  std::size_t layer;
};

NonnegMatrix& slot(FactorStack& s, BlockRef b) {
  return b.role == Role::W ? s.w[b.layer] : s.h[b.layer];
}

// Projected gradient descent with Armijo backtracking on one block; the other
// blocks stay fixed. Returns false if a line search gave up.
bool pgd_block(const ModelSpec& spec, const NonnegMatrix& x, FactorStack& stack,
               BlockRef block, double& step, const StopRule& stop,
               double& obj) {
  auto grad_of = [&]() {
    return nonlinear_finetune_gradients(spec, x, stack, block.role, block.layer);
  };
  DenseMatrix g = grad_of();
  const double r0 = projected_gradient_norm(g, slot(stack, block).mat());
  if (r0 == 0.0) return true;

  for (int it = 0; it < stop.max_iters; ++it) {
    NonnegMatrix current = slot(stack, block);
    double t = 2.0 * step;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, t *= 0.5) {
      DenseMatrix cand = current.mat() - t * g;
      project_nonneg_inplace(cand);
      const double decrease_bound = kArmijoC * g.cwiseProduct(cand - current.mat()).sum();
      if (cand == current.mat()) {
        // Projection pins every moving coordinate; nothing left to do.
        return true;
      }
      slot(stack, block) = NonnegMatrix::adopt(std::move(cand));
      const double trial = objective(spec, x, stack);
      if (std::isfinite(trial) && trial < obj && trial <= obj + decrease_bound) {
        obj = trial;
        step = t;
        accepted = true;
        break;
      }
      slot(stack, block) = current;
    }
    if (!accepted) return false;

    g = grad_of();
    if (projected_gradient_norm(g, slot(stack, block).mat()) <= stop.grad_tol * r0) {
      break;
    }
  }
  return true;
}

}  // namespace

FinetuneResult nonlinear_finetune(const ModelSpec& spec, const NonnegMatrix& x,
                                  FactorStack stack, const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  stack.check(spec, x.rows(), x.cols());
  const Activation act(effective_kind(spec));
  const std::size_t depth = spec.depth();
  const double data_sq = x.mat().squaredNorm();

  FinetuneResult out;
  TrainReport& report = out.report;
  double obj = objective(spec, x, stack);
  report.objective_trace.push_back(obj);

  // Step sizes persist across sweeps: index 0 is H_L, index l is W_l.
  std::vector<double> steps(depth + 1, 1.0);

  for (int sweep = 0; sweep < cfg.outer.max_sweeps; ++sweep) {
    const double before = obj;

    if (!pgd_block(spec, x, stack, {Role::H, depth - 1}, steps[0], cfg.inner, obj)) {
      report.stalled = true;
    }
    for (std::size_t l = 1; l < depth; ++l) {
      if (!pgd_block(spec, x, stack, {Role::W, l}, steps[l], cfg.inner, obj)) {
        report.stalled = true;
      }
    }

    // Hidden representations follow the layers above; they are not free
    // variables of the objective.
    DenseMatrix inner = stack.h.back().mat();
    for (std::size_t l = depth - 1; l > 0; --l) {
      inner = act.inverse(DenseMatrix(stack.w[l].mat() * inner));
      stack.h[l - 1] = project_nonneg(inner);
    }

    {
      // W_1 block: convex given g^{-1}(W_2 ...).
      ApgProblem prob = w_block_problem(x.mat(), nullptr, inner, spec.w_penalty(0));
      NonnegMatrix previous = stack.w[0];
      stack.w[0] = apg_solve(stack.w[0], prob, cfg.inner).solution;
      const double next = objective(spec, x, stack);
      if (!std::isfinite(next)) {
        throw NumericalError("nonlinear_finetune: non-finite objective");
      }
      if (next > obj) {
        if (next - obj > objective_slack(obj, data_sq)) {
          throw InternalError("nonlinear_finetune: W_1 update increased the objective");
        }
        stack.w[0] = std::move(previous);
      } else {
        obj = next;
      }
    }

    report.sweeps_used = sweep + 1;
    if (cfg.record_trace) report.objective_trace.push_back(obj);
    if (objective_converged(before, obj, cfg.outer.rel_obj_tol)) break;
  }
  if (report.objective_trace.back() != obj) report.objective_trace.push_back(obj);
  report.final_objective = obj;
  stack.refresh_psi();
  out.stack = std::move(stack);
  return out;
}

}  // namespace deepnmf
