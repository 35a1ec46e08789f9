#pragma once

#include <utility>
#include <vector>

#include "linalg.hpp"

namespace covsteer {

// Structural pattern of the gain K (N nu x (N+2) nx). Column block 0 is the
// constant block, block j + 1 is x_j; input block row k may use column blocks
// 0..k+1, so u_k never sees x_{k+1} or later.
class GainLayout {
 public:
  GainLayout(int horizon, int nx, int nu);

  int horizon() const { return horizon_; }
  int nx() const { return nx_; }
  int nu() const { return nu_; }
  int rows() const { return horizon_ * nu_; }
  int cols() const { return (horizon_ + 2) * nx_; }
  // Number of structural nonzeros = decision variables.
  int size() const { return static_cast<int>(entries_.size()); }

  // Last column (exclusive) allowed in row r.
  int row_extent(int r) const { return (r / nu_ + 2) * nx_; }
  bool structural(int r, int c) const { return c < row_extent(r); }
  // Decision index of (r, c), -1 for structural zeros.
  int index(int r, int c) const;
  const std::pair<int, int>& entry(int i) const { return entries_[i]; }

  Vector pack(const Matrix& K) const;
  Matrix unpack(const Vector& x) const;
  // Copy of K with every structural zero forced to exactly zero.
  Matrix project(const Matrix& K) const;

 private:
  int horizon_;
  int nx_;
  int nu_;
  std::vector<std::pair<int, int>> entries_;  // row-major over (r, c)
  std::vector<int> row_start_;
};

}  // namespace covsteer
