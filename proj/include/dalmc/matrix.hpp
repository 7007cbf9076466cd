#pragma once

#include <Eigen/Dense>

#include "dalmc/errors.hpp"

namespace dalmc {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool is_finite(const DenseMatrix& m) { return m.allFinite(); }

inline void require_finite(const DenseMatrix& m, const char* who) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(who) + ": matrix has non-finite entries");
  }
}

inline void require_nonempty(const DenseMatrix& m, const char* who) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw InvalidShape(std::string(who) + ": matrix must be at least 1x1");
  }
}

// ||A^T A - I||_F, the column-orthonormality residual.
inline double orthonormality_residual(const DenseMatrix& q) {
  const Index k = q.cols();
  return (q.transpose() * q - DenseMatrix::Identity(k, k)).norm();
}

// ||A A^T - I||_F, the row-orthonormality residual.
inline double row_orthonormality_residual(const DenseMatrix& q) {
  const Index k = q.rows();
  return (q * q.transpose() - DenseMatrix::Identity(k, k)).norm();
}

}  // namespace dalmc
