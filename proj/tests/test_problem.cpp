#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "problem.hpp"

using namespace covsteer;

namespace {

bool has(const ValidationReport& r, ErrorCode code, int step = -1, int constraint = -1) {
  for (const auto& d : r.diagnostics) {
    if (d.code == code && (step < 0 || d.step == step) &&
        (constraint < 0 || d.constraint == constraint)) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST(Validate, DoubleIntegratorPasses) {
  const auto r = validate(fx::double_integrator());
  EXPECT_TRUE(r.ok()) << r.to_string();
  EXPECT_TRUE(validate(fx::vehicle()).ok());
}

TEST(Validate, ZeroInputWeightIsNotPd) {
  auto spec = fx::double_integrator();
  spec.costs[4].R.setZero();
  const auto r = validate(spec);
  EXPECT_TRUE(has(r, ErrorCode::kNotPd, 4)) << r.to_string();
}

TEST(Validate, NoActuationIsNotControllable) {
  auto spec = fx::double_integrator();
  for (auto& s : spec.systems) {
    s.A.setZero();
    s.B.setZero();
  }
  EXPECT_TRUE(has(validate(spec), ErrorCode::kNotControllable));
}

TEST(Validate, NamesMismatchedStep) {
  auto spec = fx::double_integrator();
  spec.systems[7].B = Matrix::Ones(3, 1);
  EXPECT_TRUE(has(validate(spec), ErrorCode::kDimensionMismatch, 7));
}

TEST(Validate, IndefiniteStateWeight) {
  auto spec = fx::double_integrator();
  spec.costs[2].Q = Matrix::Identity(2, 2);
  spec.costs[2].Q(1, 1) = -1.0;
  EXPECT_TRUE(has(validate(spec), ErrorCode::kNotPsd, 2));
}

TEST(Validate, TerminalCovarianceMustBePd) {
  auto spec = fx::double_integrator();
  spec.terminal.cov(1, 1) = 0.0;
  EXPECT_TRUE(has(validate(spec), ErrorCode::kNotPd));
  spec = fx::double_integrator();
  spec.initial.cov.setZero();  // Sigma0 only needs to be PSD
  EXPECT_TRUE(validate(spec).ok());
}

TEST(Validate, RiskBudgetExceeded) {
  auto spec = fx::vehicle();
  spec.total_risk = 0.01;  // 42 rows at 0.0005 need 0.021
  EXPECT_TRUE(has(validate(spec), ErrorCode::kRiskBudgetExceeded));
}

TEST(Validate, ZeroNormalRejected) {
  auto spec = fx::double_integrator();
  spec.halfspaces[0].a.setZero();
  EXPECT_TRUE(has(validate(spec), ErrorCode::kInvalidConstraint, -1, 0));
}

TEST(Validate, StepOutOfRange) {
  auto spec = fx::double_integrator();
  spec.halfspaces[0].steps.push_back(11);
  EXPECT_FALSE(validate(spec).ok());
}

TEST(Validate, IsPure) {
  auto spec = fx::double_integrator();
  spec.costs[1].R.setZero();
  spec.systems[3].D = Matrix::Ones(1, 1);
  EXPECT_EQ(validate(spec).to_string(), validate(spec).to_string());
  EXPECT_GE(validate(spec).diagnostics.size(), 2u);
}

TEST(RiskAllocation, UniformSplit) {
  const auto a = uniform_risk_allocation(0.011, 11);
  ASSERT_EQ(a.size(), 11u);
  double sum = 0.0;
  for (double p : a) {
    EXPECT_NEAR(p, 0.001, 1e-18);
    sum += p;
  }
  EXPECT_NEAR(sum, 0.011, 4 * std::numeric_limits<double>::epsilon() * 0.011 * 11);
  const auto b = uniform_risk_allocation(0.02, 4);
  for (double p : b) EXPECT_EQ(p, 0.005);
}

TEST(RiskAllocation, HalfIsRejected) {
  try {
    uniform_risk_allocation(0.5, 1);
    FAIL() << "expected RiskTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRiskTooLarge);
  }
  EXPECT_NO_THROW(uniform_risk_allocation(0.49, 1));
}

TEST(RiskAllocation, ExplicitBudgetsKeptRestShared) {
  auto spec = fx::double_integrator();
  HalfspaceConstraint extra;
  extra.a = Vector::Ones(2);
  extra.b = 30.0;
  extra.steps = {10};
  extra.p_fail = 0.004;
  spec.halfspaces.push_back(extra);
  spec.total_risk = 0.015;
  const auto risks = resolve_row_risks(spec);
  ASSERT_EQ(risks.size(), 12u);
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(risks[i], 0.001, 1e-15);
  EXPECT_EQ(risks[11], 0.004);
  EXPECT_EQ(spec.num_chance_rows(), 12);
}
