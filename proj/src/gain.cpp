#include "gain.hpp"

#include "error.hpp"

namespace covsteer {

GainLayout::GainLayout(int horizon, int nx, int nu) : horizon_(horizon), nx_(nx), nu_(nu) {
  if (horizon < 1 || nx < 1 || nu < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "GainLayout: dimensions must be positive");
  }
  row_start_.reserve(rows() + 1);
  for (int r = 0; r < rows(); ++r) {
    row_start_.push_back(static_cast<int>(entries_.size()));
    for (int c = 0; c < row_extent(r); ++c) entries_.emplace_back(r, c);
  }
  row_start_.push_back(static_cast<int>(entries_.size()));
}

int GainLayout::index(int r, int c) const {
  if (r < 0 || r >= rows() || c < 0 || c >= cols() || !structural(r, c)) return -1;
  return row_start_[r] + c;
}

Vector GainLayout::pack(const Matrix& K) const {
  if (K.rows() != rows() || K.cols() != cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "GainLayout::pack: K has the wrong shape");
  }
  Vector x(size());
  for (int i = 0; i < size(); ++i) x(i) = K(entries_[i].first, entries_[i].second);
  return x;
}

Matrix GainLayout::unpack(const Vector& x) const {
  if (x.size() != size()) {
    throw Error(ErrorCode::kDimensionMismatch, "GainLayout::unpack: wrong vector length");
  }
  Matrix K = Matrix::Zero(rows(), cols());
  for (int i = 0; i < size(); ++i) K(entries_[i].first, entries_[i].second) = x(i);
  return K;
}

Matrix GainLayout::project(const Matrix& K) const { return unpack(pack(K)); }

}  // namespace covsteer
