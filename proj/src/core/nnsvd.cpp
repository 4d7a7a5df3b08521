#include "deepnmf/nnsvd.hpp"

#include "deepnmf/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace deepnmf {

InitPair nnsvd_init(const NonnegMatrix& x, Index k) {
  const Index m = x.rows();
  const Index n = x.cols();
  if (k < 1 || k > std::min(m, n)) {
    throw InvalidInput("nnsvd_init: k=" + std::to_string(k) +
                       " outside [1, min(rows, cols)=" +
                       std::to_string(std::min(m, n)) + "]");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(x.mat()),
                                        Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();

  DenseMatrix w = DenseMatrix::Zero(m, k);
  DenseMatrix h = DenseMatrix::Zero(k, n);

  // Leading pair is sign-coherent for a nonnegative matrix (Perron-Frobenius);
  // fix the arbitrary global sign and absorb round-off with abs().
  {
    const double s = std::sqrt(sigma(0));
    const double sign = u.col(0).sum() < 0.0 ? -1.0 : 1.0;
    w.col(0) = (sign * s * u.col(0)).cwiseMax(0.0);
    h.row(0) = (sign * s * v.col(0)).cwiseMax(0.0).transpose();
  }

  for (Index j = 1; j < k; ++j) {
    const Eigen::VectorXd up = u.col(j).cwiseMax(0.0);
    const Eigen::VectorXd un = (-u.col(j)).cwiseMax(0.0);
    const Eigen::VectorXd vp = v.col(j).cwiseMax(0.0);
    const Eigen::VectorXd vn = (-v.col(j)).cwiseMax(0.0);
    const double up_n = up.norm(), un_n = un.norm();
    const double vp_n = vp.norm(), vn_n = vn.norm();
    const double mp = up_n * vp_n;
    const double mn = un_n * vn_n;
    // Ties go to the positive part.
    if (mp >= mn) {
      if (mp > 0.0) {
        const double scale = std::sqrt(sigma(j) * mp);
        w.col(j) = scale / up_n * up;
        h.row(j) = (scale / vp_n * vp).transpose();
      }
    } else {
      const double scale = std::sqrt(sigma(j) * mn);
      w.col(j) = scale / un_n * un;
      h.row(j) = (scale / vn_n * vn).transpose();
    }
  }

  const double fill = x.mat().mean() / double(k);
  for (Index j = 0; j < k; ++j) {
    if (w.col(j).maxCoeff() <= 0.0 || h.row(j).maxCoeff() <= 0.0) {
      w.col(j).setConstant(fill);
      h.row(j).setConstant(fill);
    }
  }
  return {NonnegMatrix::adopt(std::move(w)), NonnegMatrix::adopt(std::move(h))};
}

}  // namespace deepnmf
