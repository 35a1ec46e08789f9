#pragma once

#include <Eigen/Dense>

namespace covsteer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Absolute PSD/PD thresholds scaled by the matrix size (Frobenius norm).
inline double psd_tolerance(const Matrix& m) { return -1e-9 * (1.0 + m.norm()); }
inline double pd_tolerance(const Matrix& m) { return 1e-9 * (1.0 + m.norm()); }

// Smallest eigenvalue of the symmetric part.
double min_eigenvalue(const Matrix& m);

// Symmetric PSD square root via eigen-decomposition. Eigenvalues inside
// [psd_tolerance, 0) are clamped to zero; anything below throws NotPsd.
Matrix psd_sqrt(const Matrix& m);

// Block-diagonal assembly of an arbitrary list of (possibly rectangular)
// blocks.
Matrix block_diagonal(std::initializer_list<const Matrix*> blocks);

}  // namespace covsteer
