#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "chance.hpp"
#include "fixtures.hpp"
#include "lifting.hpp"
#include "mean_steer.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "steering.hpp"

using namespace covsteer;

namespace {

struct Setup {
  ProblemSpec spec;
  LiftedSystem lifted;
  std::vector<DeterministicRow> rows;
};

Setup make_setup(ProblemSpec spec, bool with_rows) {
  Setup s{std::move(spec), {}, {}};
  s.lifted = build_lifted(s.spec);
  if (with_rows) s.rows = make_rows(lift_halfspaces(s.spec, s.lifted));
  return s;
}

SteeringResult solve_setup(const Setup& s) {
  const auto backend = conic::make_backend("ipm");
  const auto program = assemble(s.lifted, s.spec.terminal.mean, s.spec.terminal.cov, s.rows);
  return solve(program, s.lifted, s.spec.terminal.mean, s.spec.terminal.cov, s.rows, *backend);
}

Matrix random_gain(const LiftedSystem& L, std::mt19937_64& rng, double scale = 0.1) {
  return fx::GainLayoutProbe{L.horizon, L.nx, L.nu}.random_causal(rng, scale);
}

}  // namespace

TEST(ObjectiveValue, VanishesWithoutSpread) {
  auto spec = fx::double_integrator(false);
  spec.initial.mean.setZero();
  spec.initial.cov.setZero();
  for (auto& s : spec.systems) s.D.setZero();
  const auto L = build_lifted(spec);
  EXPECT_EQ(objective_value(Matrix::Zero(L.input_dim(), L.stacked_dim()), L), 0.0);
}

TEST(ObjectiveValue, ZeroGainIsUncontrolledCost) {
  std::mt19937_64 rng(3);
  const auto spec = fx::random_ltv(4, 2, 1, 2, rng);
  const auto L = build_lifted(spec);
  const Matrix second = L.boldA *
                            (L.mu0_aug * L.mu0_aug.transpose() + L.Sigma0_aug) *
                            L.boldA.transpose() +
                        L.boldD * L.boldD.transpose();
  EXPECT_NEAR(objective_value(Matrix::Zero(L.input_dim(), L.stacked_dim()), L),
              (L.boldQ * second).trace(), 1e-10);
}

TEST(ObjectiveValue, MonteCarloOracle) {
  const auto spec = fx::scalar_two_step(0.4);
  const auto L = build_lifted(spec);
  std::mt19937_64 rng(7);
  const Matrix K = random_gain(L, rng, 0.5);
  const double J = objective_value(K, L);
  const auto mc = oracle::scalar_cost_by_sampling(spec, L, K, 1000000, 1234);
  EXPECT_NEAR(mc.mean, J, 3.0 * mc.stderr_);
}

TEST(ObjectiveValue, Convex) {
  std::mt19937_64 rng(11);
  const auto spec = fx::random_ltv(3, 2, 2, 2, rng);
  const auto L = build_lifted(spec);
  for (int i = 0; i < 20; ++i) {
    const Matrix a = random_gain(L, rng, 1.0);
    const Matrix b = random_gain(L, rng, 1.0);
    const double t = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    EXPECT_LE(objective_value(t * a + (1 - t) * b, L),
              t * objective_value(a, L) + (1 - t) * objective_value(b, L) + 1e-9);
  }
}

TEST(TerminalMeanRows, AffineInGain) {
  std::mt19937_64 rng(13);
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  const GainLayout layout(L.horizon, L.nx, L.nu);
  const auto eq = terminal_mean_rows(L, layout, spec.terminal.mean);
  EXPECT_EQ(eq.A.rows(), 2);
  for (int i = 0; i < 5; ++i) {
    const Matrix K = random_gain(L, rng);
    const Matrix M = Matrix::Identity(L.stacked_dim(), L.stacked_dim()) + L.boldB * K;
    const Vector direct = L.boldEN * M * L.open_loop_mean() - spec.terminal.mean;
    EXPECT_LT((eq.A * layout.pack(K) - eq.b - direct).norm(), 1e-10);
  }
}

TEST(TerminalMeanRows, ZeroGainFeasibleIffDrift) {
  auto spec = fx::double_integrator();
  auto L = build_lifted(spec);
  const Matrix K0 = Matrix::Zero(L.input_dim(), L.stacked_dim());
  EXPECT_GT(terminal_mean_residual(K0, L, spec.terminal.mean), 1.0);
  const Vector drift = L.Abar(10) * spec.initial.mean;
  EXPECT_LT(terminal_mean_residual(K0, L, drift), 1e-12);
}

TEST(TerminalCovBlock, SvecMatchesDirectLmi) {
  std::mt19937_64 rng(17);
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  const GainLayout layout(L.horizon, L.nx, L.nu);
  const auto lmi = terminal_cov_block(L, layout, spec.terminal.cov);
  EXPECT_EQ(lmi.order, 13 * 2);
  const Matrix K = random_gain(L, rng);
  const Vector affine = lmi.h - lmi.G * layout.pack(K);
  EXPECT_LT((conic::smat(affine, lmi.order) - terminal_cov_lmi(K, L, spec.terminal.cov)).norm(),
            1e-10);
}

TEST(TerminalCovBlock, LmiAgreesWithNormForm) {
  std::mt19937_64 rng(19);
  const auto spec = fx::double_integrator();
  const auto L = build_lifted(spec);
  int feasible = 0;
  for (int i = 0; i < 10; ++i) {
    const Matrix K = random_gain(L, rng, 0.05);
    // Place Sigma_N on both sides of the achieved terminal covariance.
    const Matrix achieved = L.boldEN * (Matrix::Identity(L.stacked_dim(), L.stacked_dim()) + L.boldB * K) *
                            L.open_loop_covariance() *
                            (Matrix::Identity(L.stacked_dim(), L.stacked_dim()) + L.boldB * K).transpose() *
                            L.boldEN.transpose();
    const double c = (i % 2 == 0 ? 1.2 : 0.8) * Eigen::SelfAdjointEigenSolver<Matrix>(achieved).eigenvalues().maxCoeff();
    const Matrix sigmaN = c * Matrix::Identity(2, 2);
    const double oracle = Eigen::SelfAdjointEigenSolver<Matrix>(sigmaN - achieved).eigenvalues().minCoeff();
    const double lmi_min = Eigen::SelfAdjointEigenSolver<Matrix>(terminal_cov_lmi(K, L, sigmaN)).eigenvalues().minCoeff();
    const double norm_margin = terminal_cov_norm_margin(K, L, sigmaN);
    EXPECT_EQ(oracle >= 0.0, lmi_min >= -1e-9) << i;
    EXPECT_EQ(oracle >= 0.0, norm_margin >= -1e-9) << i;
    EXPECT_NEAR(terminal_cov_slack(K, L, sigmaN), oracle, 1e-9 * (1.0 + c));
    feasible += oracle >= 0.0;
  }
  EXPECT_EQ(feasible, 5);
}

TEST(Assemble, DecisionCountAndConeOrder) {
  const auto s = make_setup(fx::double_integrator(), true);
  const auto program = assemble(s.lifted, s.spec.terminal.mean, s.spec.terminal.cov, s.rows);
  int count = 0;
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 24; ++c) count += c < (r + 2) * 2;
  }
  EXPECT_EQ(program.layout.size(), count);
  EXPECT_EQ(count, 130);
  EXPECT_EQ(program.program.num_vars(), count + 1);
  EXPECT_EQ(program.program.num_eq(), 2);
  const auto& cones = program.program.cones;
  ASSERT_EQ(cones.size(), 1u + 11u + 1u);
  EXPECT_EQ(cones.front().kind, conic::ConeKind::kSecondOrder);
  for (std::size_t i = 1; i < 12; ++i) EXPECT_EQ(cones[i].kind, conic::ConeKind::kSecondOrder);
  EXPECT_EQ(cones.back().kind, conic::ConeKind::kPsd);
  EXPECT_EQ(cones.back().size, 26);
}

TEST(Assemble, DuplicateRowsGiveIdenticalBlocks) {
  auto s = make_setup(fx::double_integrator(), true);
  s.rows = {s.rows[4], s.rows[4]};
  const auto program = assemble(s.lifted, s.spec.terminal.mean, s.spec.terminal.cov, s.rows);
  const auto& p = program.program;
  const int first = p.cones[0].dim();
  const int size = p.cones[1].dim();
  const Matrix G = Matrix(p.G);
  EXPECT_EQ(G.middleRows(first, size), G.middleRows(first + size, size));
  EXPECT_EQ(p.h.segment(first, size), p.h.segment(first + size, size));
}

TEST(Solve, CovarianceSteering) {
  const auto s = make_setup(fx::double_integrator(false), false);
  const auto res = solve_setup(s);
  ASSERT_EQ(res.report.status, SolveStatus::kOptimal) << res.report.message;
  EXPECT_NEAR(res.report.objective, 24.05, 0.15);
  EXPECT_GE(res.report.terminal_cov_slack, -1e-7);
  EXPECT_LE(res.report.terminal_mean_residual, 1e-6);
  const GainLayout layout(s.lifted.horizon, s.lifted.nx, s.lifted.nu);
  EXPECT_EQ(layout.project(res.K), res.K);
}

TEST(Solve, ChanceConstrained) {
  const auto s = make_setup(fx::double_integrator(), true);
  const auto res = solve_setup(s);
  ASSERT_EQ(res.report.status, SolveStatus::kOptimal) << res.report.message;
  EXPECT_NEAR(res.report.objective, 24.16, 0.15);
  EXPECT_LE(res.report.max_row_residual, 1e-6);
  EXPECT_GE(res.report.max_row_residual, -1e-3);
  const auto cov = solve_setup(make_setup(fx::double_integrator(false), false));
  EXPECT_LT(cov.report.objective, res.report.objective);
}

TEST(Solve, NoiseFloorIsInfeasible) {
  auto spec = fx::double_integrator(false);
  // Still PD for validation, but below D D' = 1e-4 I added by the last step.
  spec.terminal.cov = 1e-6 * Matrix::Identity(2, 2);
  const auto res = solve_setup(make_setup(spec, false));
  EXPECT_EQ(res.report.status, SolveStatus::kInfeasible) << res.report.message;
}

TEST(Solve, SeparationOnRandomSystem) {
  std::mt19937_64 rng(31);
  const auto spec = fx::random_ltv(4, 2, 1, 2, rng);
  const auto s = make_setup(spec, false);
  const auto res = solve_setup(s);
  ASSERT_EQ(res.report.status, SolveStatus::kOptimal) << res.report.message;
  const auto plan = solve_mean(s.lifted, spec.initial.mean, spec.terminal.mean);
  const double expected = plan.J_mu + oracle::unconstrained_covariance_cost(s.lifted);
  EXPECT_NEAR(res.report.objective, expected, 1e-4 * expected);
  const Vector mean = (Matrix::Identity(s.lifted.stacked_dim(), s.lifted.stacked_dim()) +
                       s.lifted.boldB * res.K) *
                      s.lifted.open_loop_mean();
  EXPECT_LT((mean.tail(plan.Xbar.size()) - plan.Xbar).cwiseAbs().maxCoeff(), 1e-5);
}
