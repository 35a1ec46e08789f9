#pragma once

#include <vector>

#include "lifting.hpp"

namespace covsteer {

// Deterministic surrogate of Pr(alpha' boldX > beta) <= p_fail:
//   alpha'(I + boldB K) boldA mu0_aug - beta + z ||S_half (I + boldB K)' alpha|| <= 0
// with z the (1 - p_fail) standard normal quantile.
struct DeterministicRow {
  Vector alpha;
  double beta = 0.0;
  double z = 0.0;
  double p_fail = 0.0;
  int constraint = -1;
  int step = -1;
};

std::vector<DeterministicRow> make_rows(const std::vector<LiftedHalfspace>& halfspaces);

// Mean part alpha'(I + boldB K) boldA mu0_aug - beta.
double row_mean_slack(const DeterministicRow& row, const Matrix& K, const LiftedSystem& lifted);
// Standard deviation of alpha' boldX under K: ||S_half (I + boldB K)' alpha||.
double row_std(const DeterministicRow& row, const Matrix& K, const LiftedSystem& lifted);
// Feasible iff <= 0.
double row_residual(const DeterministicRow& row, const Matrix& K, const LiftedSystem& lifted);

}  // namespace covsteer
