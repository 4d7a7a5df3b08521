#include "deepnmf/apg.hpp"

#include "deepnmf/error.hpp"

#include <cmath>
#include <string>

namespace deepnmf {

namespace {

constexpr int kDivergenceCheckEvery = 50;

void validate(const ApgProblem& problem) {
  if (!problem.grad) {
    throw InvalidInput("apg: problem has no gradient oracle");
  }
  if (!(problem.lipschitz > 0.0) || !std::isfinite(problem.lipschitz)) {
    throw InvalidInput("apg: Lipschitz constant must be positive and finite, got " +
                       std::to_string(problem.lipschitz));
  }
  if (problem.rows < 1 || problem.cols < 1) {
    throw InvalidInput("apg: zero-size block");
  }
}

DenseMatrix checked_grad(const ApgProblem& problem, const DenseMatrix& at) {
  DenseMatrix g = problem.grad(at);
  if (g.rows() != problem.rows || g.cols() != problem.cols) {
    throw InternalError("apg: gradient oracle returned wrong shape");
  }
  if (!g.allFinite()) {
    throw NumericalError("apg: non-finite gradient");
  }
  return g;
}

}  // namespace

ApgState ApgState::start(const NonnegMatrix& initial) {
  return ApgState{initial, initial, initial.mat(), 1.0, 0};
}

double next_alpha(double alpha) noexcept {
  return 0.5 * (1.0 + std::sqrt(4.0 * alpha * alpha + 1.0));
}

double projected_gradient_norm(const DenseMatrix& grad, const DenseMatrix& x) {
  double sum = 0.0;
  for (Index i = 0; i < grad.rows(); ++i) {
    for (Index j = 0; j < grad.cols(); ++j) {
      const double g = grad(i, j);
      if (x(i, j) > 0.0 || g < 0.0) sum += g * g;
    }
  }
  return std::sqrt(sum);
}

ApgState apg_step(const ApgState& state, const ApgProblem& problem) {
  validate(problem);
  const DenseMatrix g = checked_grad(problem, state.search_point);
  DenseMatrix next = state.search_point - g / problem.lipschitz;
  project_nonneg_inplace(next);

  ApgState out;
  out.alpha = next_alpha(state.alpha);
  const double momentum = (state.alpha - 1.0) / out.alpha;
  out.search_point = next + momentum * (next - state.current.mat());
  out.previous = state.current;
  out.current = NonnegMatrix::adopt(std::move(next));
  out.iter = state.iter + 1;
  return out;
}

ApgResult apg_solve(const NonnegMatrix& initial, const ApgProblem& problem,
                    const StopRule& stop) {
  validate(problem);
  if (initial.rows() != problem.rows || initial.cols() != problem.cols) {
    throw InvalidInput("apg_solve: initial iterate has wrong shape");
  }
  if (stop.max_iters < 1 || !(stop.grad_tol > 0.0)) {
    throw InvalidInput("apg_solve: invalid stop rule");
  }

  ApgResult result;
  result.initial_residual =
      projected_gradient_norm(checked_grad(problem, initial), initial);
  result.final_residual = result.initial_residual;
  if (result.initial_residual == 0.0) {
    result.solution = initial;
    result.converged = true;
    return result;
  }

  const bool has_objective = static_cast<bool>(problem.objective);
  const double obj0 = has_objective ? problem.objective(initial) : 0.0;
  const double threshold = stop.grad_tol * result.initial_residual;

  ApgState state = ApgState::start(initial);
  NonnegMatrix first_step;
  while (state.iter < stop.max_iters) {
    state = apg_step(state, problem);
    if (state.iter == 1) first_step = state.current;

    result.final_residual = projected_gradient_norm(
        checked_grad(problem, state.current), state.current);
    if (result.final_residual <= threshold) {
      result.converged = true;
      break;
    }
    if (has_objective && state.iter % kDivergenceCheckEvery == 0) {
      const double obj = problem.objective(state.current);
      if (!std::isfinite(obj) || obj > 10.0 * std::abs(obj0) + 1e-12) {
        throw NumericalError("apg_solve: objective diverged (" +
                             std::to_string(obj) + " vs initial " +
                             std::to_string(obj0) +
                             "); Lipschitz constant too small?");
      }
    }
  }
  result.iterations = state.iter;
  result.solution = std::move(state.current);

  // Accelerated iterates are not monotone. The first step is (descent lemma),
  // so fall back to it, or to the start, if the final point lost ground.
  if (has_objective) {
    const double obj = problem.objective(result.solution);
    if (!(obj <= obj0)) {
      const double obj1 = problem.objective(first_step);
      result.solution = obj1 <= obj0 ? std::move(first_step) : initial;
      result.converged = false;
    }
  }
  return result;
}

}  // namespace deepnmf
