#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "../linalg.hpp"

namespace covsteer::conic {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

enum class ConeKind { kNonnegative, kSecondOrder, kPsd };

struct Cone {
  ConeKind kind = ConeKind::kNonnegative;
  // Nonnegative and second-order: number of entries. PSD: matrix order.
  int size = 0;

  // Number of slack entries the cone occupies (svec length for PSD).
  int dim() const { return kind == ConeKind::kPsd ? size * (size + 1) / 2 : size; }
  // Barrier degree.
  int degree() const {
    return kind == ConeKind::kNonnegative ? size : (kind == ConeKind::kSecondOrder ? 1 : size);
  }
};

// Standard form
//   minimise c'x  subject to  A x = b,  h - G x in K,
// with K a product of cones laid out in order. PSD slacks use the scaled
// lower-triangular column-major svec, whose Euclidean inner product matches
// the trace inner product.
struct ConicProgram {
  Vector c;
  SparseMatrix A;
  Vector b;
  SparseMatrix G;
  Vector h;
  std::vector<Cone> cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eq() const { return static_cast<int>(b.size()); }
  int cone_dim() const;
  int degree() const;
  // Throws DimensionMismatch when the pieces do not fit together.
  void check() const;
};

// svec / smat for symmetric matrices of order p.
int svec_index(int i, int j, int p);  // i >= j
Vector svec(const Matrix& m);
Matrix smat(const Eigen::Ref<const Vector>& v, int p);

// Sparse text dump, format "covsteer-conic 1":
//   covsteer-conic 1
//   vars <n> eq <p> rows <m>
//   cones <count>
//   l <size> | q <size> | s <order>      (one line per cone, in order)
//   c <n values>
//   b <p values>
//   h <m values>
//   A <nnz>  followed by nnz lines "row col value" (0-based)
//   G <nnz>  followed by nnz lines "row col value"
// Values are printed with 17 significant digits.
void write_program(const ConicProgram& program, std::ostream& out);
void write_program(const ConicProgram& program, const std::string& path);
ConicProgram read_program(std::istream& in);

}  // namespace covsteer::conic
