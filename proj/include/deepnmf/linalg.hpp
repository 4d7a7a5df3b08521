#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace deepnmf {

// Row-major dense matrix. Data matrices are features x samples: columns are
// samples throughout the library.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// A dense matrix whose entries are all >= 0 (and finite).
class NonnegMatrix {
 public:
  NonnegMatrix() = default;

  // Validates; throws InvalidInput on a negative or non-finite entry.
  explicit NonnegMatrix(DenseMatrix m);

  static NonnegMatrix zeros(Index rows, Index cols);

  // Skips validation. Only for values that are nonnegative by construction
  // (e.g. the output of a projection).
  static NonnegMatrix adopt(DenseMatrix m) noexcept;

  const DenseMatrix& mat() const noexcept { return m_; }
  operator const DenseMatrix&() const noexcept { return m_; }

  Index rows() const noexcept { return m_.rows(); }
  Index cols() const noexcept { return m_.cols(); }
  double operator()(Index r, Index c) const { return m_(r, c); }

 private:
  DenseMatrix m_;
};

// Entrywise max(m, 0). Throws InvalidInput on non-finite entries.
NonnegMatrix project_nonneg(const DenseMatrix& m);

// In-place variant used on hot paths; no finiteness check.
void project_nonneg_inplace(DenseMatrix& m) noexcept;

inline constexpr double kDefaultSpectralTol = 1e-9;
inline constexpr int kPowerIterationCap = 10'000;

// Largest singular value by power iteration on m^T m, started from the
// normalized all-ones vector. Converged when the relative change of the
// estimate drops below tol. Throws ConvergenceError (carrying the last
// estimate) if the cap is hit.
double spectral_norm(const DenseMatrix& m, double tol = kDefaultSpectralTol);

// ||m^T m||_2 == spectral_norm(m)^2. Falls back to the Frobenius upper bound
// when power iteration does not converge, so the result is always usable as
// a Lipschitz constant.
double gram_norm(const DenseMatrix& m);

// ||xi^T xi||_2 for the all-ones row vector xi of length dim, i.e. dim.
double ones_gram_norm(Index dim);

double frobenius_sq(const DenseMatrix& m) noexcept;

// Fraction of entries with |v| < threshold.
double near_zero_fraction(const DenseMatrix& m, double threshold = 1e-6);

}  // namespace deepnmf
