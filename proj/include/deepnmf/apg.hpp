#pragma once

#include "deepnmf/linalg.hpp"

#include <functional>

namespace deepnmf {

// One convex, nonnegativity-constrained block subproblem.
struct ApgProblem {
  std::function<DenseMatrix(const DenseMatrix&)> grad;
  // Optional. Used for the divergence guard and to make the returned iterate
  // never worse than the starting one.
  std::function<double(const DenseMatrix&)> objective;
  double lipschitz = 0.0;
  Index rows = 0;
  Index cols = 0;
};

struct ApgState {
  NonnegMatrix current;
  NonnegMatrix previous;
  // Extrapolated point; not projected, so it may carry negative entries.
  DenseMatrix search_point;
  double alpha = 1.0;
  int iter = 0;

  static ApgState start(const NonnegMatrix& initial);
};

struct StopRule {
  int max_iters = 500;
  double grad_tol = 1e-4;
};

struct ApgResult {
  NonnegMatrix solution;
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  bool converged = false;
};

// Next momentum coefficient: (1 + sqrt(4 a^2 + 1)) / 2.
double next_alpha(double alpha) noexcept;

// Frobenius norm of the projected gradient: entries sitting at zero with a
// positive gradient are dropped, everything else counts.
double projected_gradient_norm(const DenseMatrix& grad, const DenseMatrix& x);

// One accelerated projected-gradient step, gradient taken at the search point.
ApgState apg_step(const ApgState& state, const ApgProblem& problem);

// Iterates apg_step until the projected-gradient residual at the current
// iterate drops below grad_tol times its initial value, or max_iters.
//
// Throws InvalidInput on a malformed problem, NumericalError on a non-finite
// gradient or when the objective grows past 10x its initial value (a wrong
// Lipschitz constant).
ApgResult apg_solve(const NonnegMatrix& initial, const ApgProblem& problem,
                    const StopRule& stop);

}  // namespace deepnmf
