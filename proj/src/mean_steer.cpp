#include "mean_steer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <string>

namespace covsteer {

MeanPlan solve_mean(const LiftedSystem& lifted, const Vector& mu0, const Vector& muN) {
  const int nx = lifted.nx;
  if (mu0.size() != nx || muN.size() != nx) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_mean: boundary means must have length nx");
  }
  const Matrix& calB = lifted.calB;
  const Matrix& Qbar = lifted.Qbar;
  const Matrix bN = lifted.terminal_input_map();
  const Vector drift = lifted.calA * mu0;
  const Vector terminal_drift = drift.tail(nx);

  const Matrix calR = symmetric_part(calB.transpose() * Qbar * calB + lifted.Rbar);
  Eigen::LLT<Matrix> r_llt(calR);
  if (r_llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPd, "solve_mean: calB' Qbar calB + Rbar is not positive definite");
  }
  // Ubar = calR^{-1} (-calB' Qbar calA mu0 + Bbar_N' lambda / 2)
  const Vector cross = calB.transpose() * (Qbar * drift);
  const Vector free_input = r_llt.solve(-cross);
  const Matrix rinv_bNt = r_llt.solve(bN.transpose());
  const Matrix gram = symmetric_part(bN * rinv_bNt);

  Eigen::LLT<Matrix> g_llt(gram);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double smin = eig.eigenvalues().minCoeff();
  const double smax = eig.eigenvalues().maxCoeff();
  if (g_llt.info() != Eigen::Success || !(smin > 1e-14 * smax)) {
    throw Error(ErrorCode::kSingularTerminalMap,
                "solve_mean: Bbar_N calR^{-1} Bbar_N' is singular (sigma_min " +
                    std::to_string(smin) + ")");
  }
  const Vector miss = muN - terminal_drift - bN * free_input;
  const Vector half_lambda = g_llt.solve(miss);

  MeanPlan plan;
  plan.lambda = 2.0 * half_lambda;
  plan.Ubar = free_input + rinv_bNt * half_lambda;
  plan.Xbar = drift + calB * plan.Ubar;
  plan.J_mu = mean_cost(lifted, mu0, plan.Ubar);
  plan.stationarity_residual =
      (2.0 * calR * plan.Ubar + 2.0 * cross - bN.transpose() * plan.lambda).norm();
  plan.terminal_residual = (plan.Xbar.tail(nx) - muN).norm();
  return plan;
}

double mean_cost(const LiftedSystem& lifted, const Vector& mu0, const Vector& Ubar) {
  if (Ubar.size() != lifted.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "mean_cost: Ubar must have length N nu");
  }
  const Vector xbar = lifted.calA * mu0 + lifted.calB * Ubar;
  return xbar.dot(lifted.Qbar * xbar) + Ubar.dot(lifted.Rbar * Ubar);
}

}  // namespace covsteer
