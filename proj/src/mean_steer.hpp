#pragma once

#include "lifting.hpp"

namespace covsteer {

// Open-loop optimal mean plan without chance constraints.
struct MeanPlan {
  Vector Ubar;    // N nu
  Vector Xbar;    // (N+1) nx
  double J_mu = 0.0;
  Vector lambda;  // terminal multiplier, nx
  // Norms of the first-order conditions at the returned plan.
  double stationarity_residual = 0.0;
  double terminal_residual = 0.0;
};

// Minimises Xbar' Qbar Xbar + Ubar' Rbar Ubar subject to E_N Xbar = mu_N,
// using Cholesky solves with calR = calB' Qbar calB + Rbar and with
// Bbar_N calR^{-1} Bbar_N'.
MeanPlan solve_mean(const LiftedSystem& lifted, const Vector& mu0, const Vector& muN);

double mean_cost(const LiftedSystem& lifted, const Vector& mu0, const Vector& Ubar);

}  // namespace covsteer
