#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chance.hpp"
#include "lifting.hpp"

namespace covsteer {

// u_k = l_k [1; x_0; ...; x_k], with L = K (I + boldB K)^{-1}.
struct FeedbackPolicy {
  Matrix K;
  Matrix L;                      // N nu x (N+2) nx, same causal pattern as K
  std::vector<Matrix> step_gains;  // l_k: nu x (k+2) nx
};

FeedbackPolicy recover_L(const Matrix& K, const LiftedSystem& lifted);
// Inverse map K = L (I - boldB L)^{-1}.
Matrix gain_from_L(const Matrix& L, const LiftedSystem& lifted);

// Exact moments of bold X = [1; x_0; ...; x_N] under gain K.
struct ClosedMoments {
  int nx = 0;
  Vector mean;  // (N+2) nx
  Matrix cov;   // (N+2) nx square

  Vector step_mean(int k) const { return mean.segment((k + 1) * nx, nx); }
  Matrix step_cov(int k) const { return cov.block((k + 1) * nx, (k + 1) * nx, nx, nx); }
};

ClosedMoments closed_moments(const Matrix& K, const LiftedSystem& lifted);

struct Trajectory {
  std::vector<Vector> x;  // x_0..x_N
  std::vector<Vector> u;  // u_0..u_{N-1}
  double cost = 0.0;      // sum_{k<N} x_k'Q_k x_k + u_k'R_k u_k
};

// x_0 ~ N(mu_0, Sigma_0) and w_k ~ N(0, I), all drawn from one stream seeded
// with `seed`.
Trajectory rollout(const FeedbackPolicy& policy, const ProblemSpec& spec, std::uint64_t seed);

struct SimOptions {
  std::int64_t samples = 10000;
  std::uint64_t seed = 1;
  // Terminal states kept for the first this many samples.
  std::int64_t keep_terminal = 0;
  // 0 picks std::thread::hardware_concurrency().
  int threads = 0;
};

struct SimReport {
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::string rng;
  std::vector<Vector> mean;  // per step k = 0..N
  std::vector<Matrix> cov;   // per step, unbiased (zero when samples == 1)
  double cost_mean = 0.0;
  double cost_stderr = 0.0;
  std::vector<double> row_violation;  // per row, fraction with alpha'X > beta
  double union_violation = 0.0;
  std::vector<Vector> terminal_samples;
};

// Sample statistics over independent rollouts. Sample i uses
// sample_seed(seed, i); chunks are reduced in a fixed order, so the report
// does not depend on the thread count.
SimReport monte_carlo(const FeedbackPolicy& policy, const ProblemSpec& spec,
                      const std::vector<DeterministicRow>& rows, const SimOptions& options);

}  // namespace covsteer
