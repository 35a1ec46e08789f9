#include "linalg.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "error.hpp"

namespace covsteer {

double min_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric_part(m), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "eigenvalue computation did not converge");
  }
  return eig.eigenvalues().minCoeff();
}

Matrix psd_sqrt(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "psd_sqrt: matrix is not square");
  }
  if (m.rows() == 0) return m;
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-10 * (1.0 + m.norm())) {
    throw Error(ErrorCode::kInvalidArgument,
                "psd_sqrt: matrix is not symmetric (asymmetry " + std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric_part(m));
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kSqrtFailure, "psd_sqrt: eigen-decomposition did not converge");
  }
  const double tol = psd_tolerance(m);
  Vector roots(m.rows());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < tol) {
      throw Error(ErrorCode::kNotPsd,
                  "psd_sqrt: eigenvalue " + std::to_string(lambda) + " below tolerance");
    }
    roots(i) = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
  }
  const Matrix& v = eig.eigenvectors();
  Matrix root = v * roots.asDiagonal() * v.transpose();
  return symmetric_part(root);
}

Matrix block_diagonal(std::initializer_list<const Matrix*> blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const Matrix* b : blocks) {
    rows += b->rows();
    cols += b->cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const Matrix* b : blocks) {
    out.block(r, c, b->rows(), b->cols()) = *b;
    r += b->rows();
    c += b->cols();
  }
  return out;
}

}  // namespace covsteer
