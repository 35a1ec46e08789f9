#include "chance.hpp"

#include "normal.hpp"

namespace covsteer {

std::vector<DeterministicRow> make_rows(const std::vector<LiftedHalfspace>& halfspaces) {
  std::vector<DeterministicRow> rows;
  rows.reserve(halfspaces.size());
  for (const auto& h : halfspaces) {
    if (!(h.p_fail > 0.0 && h.p_fail < 0.5)) {
      throw Error(ErrorCode::kDomainError, "make_rows: p_fail must lie in (0, 0.5)");
    }
    rows.push_back({h.alpha, h.beta, inv_norm_cdf(1.0 - h.p_fail), h.p_fail, h.constraint,
                    h.step});
  }
  return rows;
}

double row_mean_slack(const DeterministicRow& row, const Matrix& K, const LiftedSystem& lifted) {
  const Vector mean = lifted.open_loop_mean();
  const Vector c = lifted.boldB.transpose() * row.alpha;
  return row.alpha.dot(mean) + c.dot(K * mean) - row.beta;
}

double row_std(const DeterministicRow& row, const Matrix& K, const LiftedSystem& lifted) {
  const Vector c = lifted.boldB.transpose() * row.alpha;
  return (lifted.S_half * (row.alpha + K.transpose() * c)).norm();
}

double row_residual(const DeterministicRow& row, const Matrix& K, const LiftedSystem& lifted) {
  return row_mean_slack(row, K, lifted) + row.z * row_std(row, K, lifted);
}

}  // namespace covsteer
