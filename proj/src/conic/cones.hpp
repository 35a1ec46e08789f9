#pragma once

#include <vector>

#include "program.hpp"

namespace covsteer::conic {

// Segment offsets of each cone inside the stacked slack vector.
std::vector<int> cone_offsets(const std::vector<Cone>& cones);

// Identity element e of the product cone.
Vector identity_element(const std::vector<Cone>& cones);

// Jordan product u o v (arrow product for second-order cones, symmetrised
// matrix product for PSD cones).
Vector jordan_product(const std::vector<Cone>& cones, const Vector& u, const Vector& v);

// Solves u o x = v for x, u in the cone interior.
Vector jordan_divide(const std::vector<Cone>& cones, const Vector& u, const Vector& v);

// Largest alpha (capped at `cap`) keeping x + alpha d in the cone, for x in
// the interior.
double max_step(const std::vector<Cone>& cones, const Vector& x, const Vector& d, double cap);

// Smallest t with x + t e in the closed cone (negative when x is interior).
double boundary_shift(const std::vector<Cone>& cones, const Vector& x);

// Nesterov-Todd scaling W of the product cone: W z = W^{-T} s = lambda.
class NtScaling {
 public:
  explicit NtScaling(std::vector<Cone> cones);

  const std::vector<Cone>& cones() const { return cones_; }
  const std::vector<int>& offsets() const { return offsets_; }

  void set_identity();
  // Returns false when s or z is not strictly interior.
  bool update(const Vector& s, const Vector& z);

  const Vector& lambda() const { return lambda_; }

  Vector apply_w(const Vector& v) const;
  Vector apply_wt(const Vector& v) const;
  Vector apply_winv(const Vector& v) const;
  Vector apply_winvt(const Vector& v) const;

  // Dense restriction of W^{-1} W^{-T} for cone k to its local row subset.
  // Used for nonnegative and PSD cones.
  Matrix inverse_gram_block(int k, const std::vector<int>& rows) const;

  // Second-order cone k: W^{-1}W^{-T} = (2 v v' - J) / eta^2 with v = J wbar.
  double soc_eta(int k) const { return eta_[k]; }
  Vector soc_jw(int k) const;

 private:
  std::vector<Cone> cones_;
  std::vector<int> offsets_;
  Vector lambda_;
  // Nonnegative: w. SOC: wbar. Empty for PSD.
  std::vector<Vector> w_;
  std::vector<double> eta_;
  // PSD: W(U) = R' U R.
  std::vector<Matrix> r_;
  std::vector<Matrix> rinv_;
};

}  // namespace covsteer::conic
