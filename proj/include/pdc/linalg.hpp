#pragma once

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pdc/error.hpp"

namespace pdc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline bool is_symmetric(const Matrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Cholesky factor of a symmetric positive-definite matrix, or a
/// ValidationError naming `what`.
inline Eigen::LLT<Matrix> checked_cholesky(const Matrix& m, const std::string& what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw ValidationError(what + " is not positive definite");
  return llt;
}

inline double log_det_from_cholesky(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace detail
}  // namespace pdc
