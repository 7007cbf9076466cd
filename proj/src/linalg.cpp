#include "dalmc/linalg.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace dalmc {

namespace {

// Largest-magnitude entry of each u column made positive; ties broken by
// lowest row index. v columns flip together with u so the product u s v^T
// is unchanged.
void fix_signs(DenseMatrix& u, DenseMatrix& v) {
  for (Index j = 0; j < u.cols(); ++j) {
    Index pivot = 0;
    double best = -1.0;
    for (Index i = 0; i < u.rows(); ++i) {
      const double mag = std::abs(u(i, j));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    if (u(pivot, j) < 0.0) {
      u.col(j) = -u.col(j);
      v.col(j) = -v.col(j);
    }
  }
}

}  // namespace

ThinSvd thin_svd(const DenseMatrix& m) {
  require_nonempty(m, "thin_svd");
  require_finite(m, "thin_svd");

  Eigen::JacobiSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out;
  out.u = svd.matrixU();
  out.sigma = svd.singularValues();
  out.v = svd.matrixV();
  fix_signs(out.u, out.v);
  return out;
}

DenseMatrix linear_orthogonal_max(const DenseMatrix& m) {
  bool ignored = false;
  return linear_orthogonal_max(m, ignored);
}

DenseMatrix linear_orthogonal_max(const DenseMatrix& m, bool& rank_deficient) {
  if (m.rows() < m.cols()) {
    throw InvalidShape("linear_orthogonal_max: need rows >= cols, got " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  require_nonempty(m, "linear_orthogonal_max");
  require_finite(m, "linear_orthogonal_max");

  const ThinSvd svd = thin_svd(m);
  const double sigma_max = svd.sigma(0);
  const double tiny = 1e-12 * std::max(1.0, sigma_max);
  rank_deficient = svd.sigma(svd.sigma.size() - 1) <= tiny;
  return svd.u * svd.v.transpose();
}

}  // namespace dalmc
