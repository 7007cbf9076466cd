#pragma once

#include <vector>

#include "dalmc/matrix.hpp"

namespace dalmc {

// Thin SVD m = u * diag(sigma) * v^T with r = min(rows, cols) retained
// singular triplets. Singular values are non-increasing; signs are fixed so
// that the largest-magnitude entry of each column of u is positive
// (magnitude ties broken by lowest row index), which makes the
// decomposition deterministic.
struct ThinSvd {
  DenseMatrix u;              // m x r
  Vector sigma;               // r, non-increasing, >= 0
  DenseMatrix v;              // k x r

  DenseMatrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

// Pure function, safe to call concurrently.
ThinSvd thin_svd(const DenseMatrix& m);

// Maximizes Tr(Q^T m) over Q (a x b, a >= b) with Q^T Q = I_b.
// Closed form Q = u v^T from the thin SVD of m. When m is rank deficient
// the maximizer is not unique; the sign-fixed u v^T is returned as the
// canonical choice and `rank_deficient` (when passed) is set.
DenseMatrix linear_orthogonal_max(const DenseMatrix& m);
DenseMatrix linear_orthogonal_max(const DenseMatrix& m, bool& rank_deficient);

}  // namespace dalmc
