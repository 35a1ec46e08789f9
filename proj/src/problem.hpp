#pragma once

#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"

namespace covsteer {

// x_{k+1} = A x_k + B u_k + D w_k
struct StepSystem {
  Matrix A;
  Matrix B;
  Matrix D;
};

// Stage cost x_k' Q x_k + u_k' R u_k. There is no terminal state weight.
struct StepCost {
  Matrix Q;
  Matrix R;
};

struct GaussianMoments {
  Vector mean;
  Matrix cov;
};

// Pr(a' x_k > b) <= p_fail for every k in steps.
struct HalfspaceConstraint {
  Vector a;
  double b = 0.0;
  std::vector<int> steps;
  // Per-row budget; when absent the row shares the remaining total risk.
  std::optional<double> p_fail;
};

// Advanced form: a single row over the whole state sequence
// X = [x_0; ...; x_N], i.e. Pr(alpha' X > beta) <= p_fail.
struct StackedConstraint {
  Vector alpha;
  double beta = 0.0;
  std::optional<double> p_fail;
};

struct ProblemSpec {
  int horizon = 0;
  std::vector<StepSystem> systems;  // size horizon
  std::vector<StepCost> costs;      // size horizon
  GaussianMoments initial;
  GaussianMoments terminal;
  std::vector<HalfspaceConstraint> halfspaces;
  std::vector<StackedConstraint> stacked;
  // Total failure budget P_fail. When absent it defaults to the sum of the
  // explicit per-row budgets.
  std::optional<double> total_risk;

  int nx() const { return systems.empty() ? 0 : static_cast<int>(systems.front().A.rows()); }
  int nu() const { return systems.empty() ? 0 : static_cast<int>(systems.front().B.cols()); }
  int nw() const { return systems.empty() ? 0 : static_cast<int>(systems.front().D.cols()); }
  // Number of lifted chance rows: one per (halfspace, step) plus stacked rows.
  int num_chance_rows() const;
};

struct Diagnostic {
  ErrorCode code = ErrorCode::kOk;
  std::string message;
  int step = -1;        // offending k, when applicable
  int constraint = -1;  // offending constraint j, when applicable
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
  std::string to_string() const;
};

ValidationReport validate(const ProblemSpec& spec);

// Throws Error(kValidationError) carrying the report text when validation fails.
void require_valid(const ProblemSpec& spec);

// M copies of P_fail / M.
std::vector<double> uniform_risk_allocation(double total_risk, int rows);

// Per-lifted-row budgets, in lifting order (halfspaces by constraint then by
// step, then stacked rows). Explicit budgets are kept; the rest share what is
// left of total_risk uniformly.
std::vector<double> resolve_row_risks(const ProblemSpec& spec);

}  // namespace covsteer
