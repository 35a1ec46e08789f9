#pragma once

#include <vector>

#include "problem.hpp"

namespace covsteer {

// Per-step prediction maps: x_k = Abar[k] x_0 + Bbar[k] U_{k-1} + Dbar[k] W_{k-1},
// where U_{k-1} = [u_0; ...; u_{k-1}] (Bbar[0] and Dbar[0] have zero columns).
struct TransitionProducts {
  std::vector<Matrix> Abar;
  std::vector<Matrix> Bbar;
  std::vector<Matrix> Dbar;
};

TransitionProducts transition_products(const ProblemSpec& spec);

// Stacked dynamics X = calA x0 + calB U + calD W with X = [x_0; ...; x_N], and
// the augmented sequence bold X = [1; X] used by the feedback parameterization.
struct LiftedSystem {
  int horizon = 0;
  int nx = 0;
  int nu = 0;
  int nw = 0;

  Matrix calA;  // (N+1)nx x nx
  Matrix calB;  // (N+1)nx x N nu, strictly lower block triangular
  Matrix calD;  // (N+1)nx x N nw, strictly lower block triangular
  Matrix Qbar;  // (N+1)nx, terminal block zero
  Matrix Rbar;  // N nu
  Matrix E0;    // nx x (N+1)nx
  Matrix EN;    // nx x (N+1)nx

  Matrix boldA;   // (N+2)nx x 2nx = blkdiag(I, calA)
  Matrix boldB;   // (N+2)nx x N nu = [0; calB]
  Matrix boldD;   // (N+2)nx x N nw = [0; calD]
  Matrix boldQ;   // (N+2)nx = blkdiag(0, Qbar)
  Matrix boldEN;  // nx x (N+2)nx

  Vector mu0_aug;     // [1; mu0]
  Matrix Sigma0_aug;  // blkdiag(0, Sigma0)
  // Square root of boldA Sigma0_aug boldA' + boldD boldD', the centred
  // second moment of bold X under zero feedback.
  Matrix S_half;

  int stacked_dim() const { return (horizon + 2) * nx; }  // length of bold X
  int input_dim() const { return horizon * nu; }

  Matrix Abar(int k) const { return calA.middleRows(k * nx, nx); }
  Matrix Bbar(int k) const { return calB.block(k * nx, 0, nx, k * nu); }
  Matrix Dbar(int k) const { return calD.block(k * nx, 0, nx, k * nw); }
  Matrix terminal_input_map() const { return calB.bottomRows(nx); }

  // boldA mu0_aug, the mean of bold X under zero feedback.
  Vector open_loop_mean() const { return boldA * mu0_aug; }
  // boldA Sigma0_aug boldA' + boldD boldD'.
  Matrix open_loop_covariance() const;
  // boldA (mu0_aug mu0_aug' + Sigma0_aug) boldA' + boldD boldD'.
  Matrix second_moment() const;
};

LiftedSystem build_lifted(const ProblemSpec& spec);

// One probabilistic row Pr(alpha' boldX > beta) <= p_fail over bold X.
struct LiftedHalfspace {
  Vector alpha;  // (N+2)nx, zero on the leading ones block
  double beta = 0.0;
  double p_fail = 0.0;
  int constraint = -1;  // index into halfspaces, then stacked
  int step = -1;        // -1 for stacked rows
};

std::vector<LiftedHalfspace> lift_halfspaces(const ProblemSpec& spec, const LiftedSystem& lifted);

}  // namespace covsteer
