#pragma once

#include "deepnmf/linalg.hpp"

namespace deepnmf {

struct InitPair {
  NonnegMatrix w;  // m x k
  NonnegMatrix h;  // k x n
};

// Nonnegative double SVD initialization.
//
// The leading singular triplet gives the first column/row directly; every
// further triplet is split into positive and negated-negative parts and the
// part with the larger norm product is kept, scaled by sqrt(sigma * product).
// Columns that come out all-zero (k above the numerical rank) are filled with
// mean(x)/k. Deterministic for a given input.
//
// Throws InvalidInput unless 1 <= k <= min(rows, cols).
InitPair nnsvd_init(const NonnegMatrix& x, Index k);

}  // namespace deepnmf
