#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "chance.hpp"
#include "fixtures.hpp"
#include "lifting.hpp"
#include "mean_steer.hpp"
#include "normal.hpp"
#include "policy.hpp"
#include "steering.hpp"

using namespace covsteer;

namespace {

Matrix random_gain(const LiftedSystem& L, std::mt19937_64& rng, double scale = 0.1) {
  return fx::GainLayoutProbe{L.horizon, L.nx, L.nu}.random_causal(rng, scale);
}

Matrix mean_only_gain(const LiftedSystem& L, const Vector& mu0, const Vector& muN) {
  const auto plan = solve_mean(L, mu0, muN);
  Matrix K = Matrix::Zero(L.input_dim(), L.stacked_dim());
  K.leftCols(L.nx) = plan.Ubar * Vector::Ones(L.nx).transpose() / L.nx;
  return K;
}

Matrix solved_chance_gain(const ProblemSpec& spec, const LiftedSystem& L) {
  const auto rows = make_rows(lift_halfspaces(spec, L));
  const auto backend = conic::make_backend("ipm");
  const auto program = assemble(L, spec.terminal.mean, spec.terminal.cov, rows);
  const auto res = solve(program, L, spec.terminal.mean, spec.terminal.cov, rows, *backend);
  EXPECT_EQ(res.report.status, SolveStatus::kOptimal) << res.report.message;
  return res.K;
}

}  // namespace

TEST(RecoverL, ZeroGain) {
  const auto L = build_lifted(fx::double_integrator());
  const auto policy = recover_L(Matrix::Zero(L.input_dim(), L.stacked_dim()), L);
  EXPECT_TRUE(policy.L.isZero(0.0));
  ASSERT_EQ(policy.step_gains.size(), 10u);
  EXPECT_EQ(policy.step_gains[3].cols(), 5 * 2);
}

// For N = 1, (boldB K)^2 = 0, so (I + boldB K)^{-1} = I - boldB K exactly.
TEST(RecoverL, NeumannSeriesOneStep) {
  std::mt19937_64 rng(5);
  auto spec = fx::random_ltv(1, 2, 2, 2, rng);
  const auto L = build_lifted(spec);
  const Matrix K = random_gain(L, rng, 1.0);
  const Matrix bk = L.boldB * K;
  ASSERT_LT((bk * bk).norm(), 1e-14);
  const Matrix neumann = K * (Matrix::Identity(L.stacked_dim(), L.stacked_dim()) - bk);
  EXPECT_LT((recover_L(K, L).L - neumann).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RecoverL, RoundTripOnSolvedGain) {
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  const Matrix K = solved_chance_gain(spec, L);
  const auto policy = recover_L(K, L);
  EXPECT_LE((gain_from_L(policy.L, L) - K).cwiseAbs().maxCoeff(), 1e-9);
  // Causality: no entry beyond the current state block.
  const GainLayout layout(L.horizon, L.nx, L.nu);
  for (int r = 0; r < layout.rows(); ++r)
    for (int c = layout.row_extent(r); c < layout.cols(); ++c) ASSERT_EQ(policy.L(r, c), 0.0);
}

TEST(RecoverL, StepGainsReproduceStackedInput) {
  std::mt19937_64 rng(7);
  const auto spec = fx::random_ltv(5, 2, 1, 2, rng);
  const auto L = build_lifted(spec);
  const auto policy = recover_L(random_gain(L, rng), L);
  const Vector X = fx::random_vector(L.stacked_dim(), rng);
  const Vector U = policy.L * X;
  for (int k = 0; k < 5; ++k) {
    EXPECT_LT(std::abs((policy.step_gains[k] * X.head((k + 2) * 2))(0) - U(k)), 1e-14);
  }
}

TEST(ClosedMoments, ZeroGainIsUncontrolled) {
  const auto L = build_lifted(fx::double_integrator());
  const auto m = closed_moments(Matrix::Zero(L.input_dim(), L.stacked_dim()), L);
  EXPECT_LT((m.cov - L.open_loop_covariance()).norm(), 1e-12);
  EXPECT_TRUE(m.mean.head(2).isOnes(0.0));
  EXPECT_TRUE(m.cov.topRows(2).isZero(0.0));
  EXPECT_EQ(m.step_mean(0), (Vector(2) << 0, 8).finished());
}

TEST(Rollout, DeterministicPlantHitsTarget) {
  auto spec = fx::double_integrator(false);
  spec.initial.cov.setZero();
  for (auto& s : spec.systems) s.D.setZero();
  const auto L = build_lifted(spec);
  const auto policy = recover_L(mean_only_gain(L, spec.initial.mean, spec.terminal.mean), L);
  const auto t = rollout(policy, spec, 42);
  ASSERT_EQ(t.x.size(), 11u);
  ASSERT_EQ(t.u.size(), 10u);
  EXPECT_LT((t.x.back() - spec.terminal.mean).norm(), 1e-8);
}

TEST(Rollout, SameSeedSameBits) {
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  std::mt19937_64 rng(9);
  const auto policy = recover_L(random_gain(L, rng), L);
  const auto a = rollout(policy, spec, 77);
  const auto b = rollout(policy, spec, 77);
  const auto c = rollout(policy, spec, 78);
  for (std::size_t k = 0; k < a.x.size(); ++k) {
    ASSERT_EQ(std::memcmp(a.x[k].data(), b.x[k].data(), sizeof(double) * 2), 0);
  }
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_NE(a.cost, c.cost);
}

TEST(MonteCarlo, MomentsAndCostMatchAnalytic) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 3; ++trial) {
    const auto spec = fx::random_ltv(4, 2, 1, 2, rng);
    const auto L = build_lifted(spec);
    const Matrix K = random_gain(L, rng, 0.3);
    const auto policy = recover_L(K, L);
    const auto exact = closed_moments(K, L);
    SimOptions opt;
    opt.samples = 100000;
    opt.seed = 100 + trial;
    const auto sim = monte_carlo(policy, spec, {}, opt);
    const double n = static_cast<double>(opt.samples);
    for (int k = 0; k <= 4; ++k) {
      const Vector mu = exact.step_mean(k);
      const Matrix sig = exact.step_cov(k);
      for (int i = 0; i < 2; ++i) {
        EXPECT_NEAR(sim.mean[k](i), mu(i), 4.0 * std::sqrt(sig(i, i) / n) + 1e-12);
        for (int j = 0; j < 2; ++j) {
          const double se = std::sqrt((sig(i, i) * sig(j, j) + sig(i, j) * sig(i, j)) / (n - 1));
          EXPECT_NEAR(sim.cov[k](i, j), sig(i, j), 4.0 * se + 1e-12) << k << i << j;
        }
      }
    }
    EXPECT_NEAR(sim.cost_mean, objective_value(K, L), 3.0 * sim.cost_stderr);
  }
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  std::mt19937_64 rng(17);
  const auto policy = recover_L(random_gain(L, rng), L);
  const auto rows = make_rows(lift_halfspaces(spec, L));
  SimOptions opt;
  opt.samples = 9000;
  opt.threads = 1;
  const auto a = monte_carlo(policy, spec, rows, opt);
  opt.threads = 7;
  const auto b = monte_carlo(policy, spec, rows, opt);
  EXPECT_EQ(a.cost_mean, b.cost_mean);
  EXPECT_EQ(a.cov.back(), b.cov.back());
  EXPECT_EQ(a.row_violation, b.row_violation);
}

TEST(MonteCarlo, SingleSample) {
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  const auto policy = recover_L(Matrix::Zero(L.input_dim(), L.stacked_dim()), L);
  const auto rows = make_rows(lift_halfspaces(spec, L));
  SimOptions opt;
  opt.samples = 1;
  opt.keep_terminal = 5;
  const auto sim = monte_carlo(policy, spec, rows, opt);
  for (double f : sim.row_violation) EXPECT_TRUE(f == 0.0 || f == 1.0);
  EXPECT_TRUE(sim.union_violation == 0.0 || sim.union_violation == 1.0);
  EXPECT_TRUE(sim.cov.back().isZero(0.0));
  EXPECT_EQ(sim.terminal_samples.size(), 1u);
  EXPECT_EQ(sim.cost_stderr, 0.0);
}

// A row placed so that z * std equals the mean gap is active: its violation
// probability is exactly p_fail. With p_fail just below one half the
// frequency sits near 0.5.
TEST(MonteCarlo, ActiveRowHitsItsBudget) {
  const auto spec = fx::double_integrator(false);
  const auto L = build_lifted(spec);
  const Matrix K = Matrix::Zero(L.input_dim(), L.stacked_dim());
  const auto policy = recover_L(K, L);
  auto halfspaces = lift_halfspaces(fx::double_integrator(), L);
  std::vector<DeterministicRow> rows;
  for (double p : {0.49, 0.1}) {
    auto h = halfspaces[6];
    h.p_fail = p;
    auto row = make_rows({h}).front();
    // shift beta so the deterministic row is exactly active
    row.beta += row_residual(row, K, L);
    rows.push_back(row);
  }
  SimOptions opt;
  opt.samples = 200000;
  const auto sim = monte_carlo(policy, spec, rows, opt);
  const double n = static_cast<double>(opt.samples);
  EXPECT_NEAR(sim.row_violation[0], 0.49, 4.0 * std::sqrt(0.49 * 0.51 / n));
  EXPECT_NEAR(sim.row_violation[1], 0.1, 4.0 * std::sqrt(0.1 * 0.9 / n));
}

TEST(MonteCarlo, ChancePolicyWithinBudget) {
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  const auto policy = recover_L(solved_chance_gain(spec, L), L);
  const auto rows = make_rows(lift_halfspaces(spec, L));
  SimOptions opt;
  opt.samples = 100;
  const auto sim = monte_carlo(policy, spec, rows, opt);
  EXPECT_LE(sim.union_violation, 0.011 + 3.0 * std::sqrt(0.011 * 0.989 / 100.0));
}

TEST(MonteCarlo, RejectsEmptyRun) {
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  const auto policy = recover_L(Matrix::Zero(L.input_dim(), L.stacked_dim()), L);
  SimOptions opt;
  opt.samples = 0;
  EXPECT_THROW(monte_carlo(policy, spec, {}, opt), Error);
}
