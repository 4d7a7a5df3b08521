#include "deepnmf/linalg.hpp"

#include "deepnmf/error.hpp"

#include <cmath>
#include <random>
#include <string>

namespace deepnmf {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

NonnegMatrix::NonnegMatrix(DenseMatrix m) : m_(std::move(m)) {
  for (Index i = 0; i < m_.rows(); ++i) {
    for (Index j = 0; j < m_.cols(); ++j) {
      const double v = m_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidInput("nonnegative matrix has entry " + std::to_string(v) +
                           " at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
      }
    }
  }
}

NonnegMatrix NonnegMatrix::zeros(Index rows, Index cols) {
  return adopt(DenseMatrix::Zero(rows, cols));
}

NonnegMatrix NonnegMatrix::adopt(DenseMatrix m) noexcept {
  NonnegMatrix out;
  out.m_ = std::move(m);
  return out;
}

NonnegMatrix project_nonneg(const DenseMatrix& m) {
  if (!m.allFinite()) {
    throw InvalidInput("project_nonneg: non-finite entry");
  }
  return NonnegMatrix::adopt(m.cwiseMax(0.0));
}

void project_nonneg_inplace(DenseMatrix& m) noexcept {
  m = m.cwiseMax(0.0);
}

namespace {

// Runs power iteration on m^T m from v. Returns the estimate of sigma_max^2.
// `stalled` is set when the first application annihilates v.
double power_iterate(const DenseMatrix& m, Eigen::VectorXd v, double tol,
                     bool& stalled) {
  stalled = false;
  const double scale = m.norm();
  Eigen::VectorXd mv = m * v;
  double mv_norm = mv.norm();
  if (mv_norm <= 1e-12 * scale) {
    stalled = true;
    return 0.0;
  }
  double estimate = mv_norm * mv_norm;
  for (int it = 0; it < kPowerIterationCap; ++it) {
    Eigen::VectorXd w = m.transpose() * mv;
    const double w_norm = w.norm();
    if (w_norm == 0.0) {
      stalled = true;
      return 0.0;
    }
    v = w / w_norm;
    mv = m * v;
    mv_norm = mv.norm();
    const double next = mv_norm * mv_norm;
    // The Rayleigh quotient is non-decreasing in exact arithmetic, so a
    // non-increase means the round-off floor has been reached.
    if (std::abs(next - estimate) <= tol * next || next <= estimate) {
      return next;
    }
    estimate = next;
  }
  throw ConvergenceError("power iteration hit the iteration cap",
                         std::sqrt(estimate));
}

}  // namespace

double spectral_norm(const DenseMatrix& m, double tol) {
  if (m.size() == 0) {
    throw InvalidInput("spectral_norm: empty matrix");
  }
  if (!(tol > 0.0)) {
    throw InvalidInput("spectral_norm: tol must be positive");
  }
  if (!m.allFinite()) {
    throw InvalidInput("spectral_norm: non-finite entry");
  }
  if (m.squaredNorm() == 0.0) {
    return 0.0;
  }
  const Index n = m.cols();
  bool stalled = false;
  double sq = power_iterate(
      m, Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n))), tol,
      stalled);
  if (stalled) {
    // All-ones start was orthogonal to the row space; retry from a fixed
    // pseudorandom vector.
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal(rng);
    v.normalize();
    sq = power_iterate(m, v, tol, stalled);
    if (stalled) {
      throw ConvergenceError("power iteration: start vector annihilated", 0.0);
    }
  }
  return std::sqrt(sq);
}

double gram_norm(const DenseMatrix& m) {
  try {
    const double s = spectral_norm(m);
    return s * s;
  } catch (const ConvergenceError&) {
    return frobenius_sq(m);
  }
}

double ones_gram_norm(Index dim) {
  if (dim < 1) {
    throw InvalidInput("ones_gram_norm: dim must be >= 1");
  }
  return double(dim);
}

double frobenius_sq(const DenseMatrix& m) noexcept { return m.squaredNorm(); }

double near_zero_fraction(const DenseMatrix& m, double threshold) {
  if (m.size() == 0) return 0.0;
  const auto count = (m.array().abs() < threshold).count();
  return double(count) / double(m.size());
}

}  // namespace deepnmf
