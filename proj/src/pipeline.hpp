#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conic/backend.hpp"
#include "policy.hpp"
#include "scenario.hpp"
#include "steering.hpp"

namespace covsteer {

enum class Mode { kMeanOnly, kCov, kChance };

const char* to_string(Mode mode);
// Accepts "mean-only", "cov", "chance"; throws InvalidArgument otherwise.
Mode parse_mode(const std::string& name);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Residual of one lifted chance row under the final gain, in every mode.
struct RowStatus {
  int constraint = -1;
  int step = -1;
  double p_fail = 0.0;
  double residual = 0.0;
};

struct RunResult {
  Mode mode = Mode::kChance;
  std::string scenario_name;
  std::string scenario_hash;
  int horizon = 0;
  int nx = 0;
  int nu = 0;
  double ellipse_sigma = 3.0;
  double total_risk = 0.0;

  SolveReport report;
  FeedbackPolicy policy;
  ClosedMoments moments;
  Vector input_mean;  // N nu
  std::vector<RowStatus> rows;
  std::optional<SimReport> sim;
  std::vector<Check> checks;

  bool checks_passed() const;
};

// mean-only: closed-form mean plan, no feedback on the state (covariance
// left uncontrolled); its status is Infeasible when a chance row fails.
// cov: conic program without chance rows. chance: full program.
// With simulate set, Monte-Carlo checks are appended to `checks`.
RunResult run(const Scenario& scenario, Mode mode, bool simulate,
              const conic::ConicBackend* backend = nullptr);

// The assembled program of a conic mode (cov or chance).
SteeringProgram build_program(const Scenario& scenario, Mode mode);

// Deterministic for fixed inputs: timings are not included.
std::string summary_json(const RunResult& result);

// Writes dir/<mode>/{trajectory,covariance,ellipses,mc_moments,samples}.csv
// and summary.json. Files that do not apply are not written.
void emit(const RunResult& result, const std::string& dir);

}  // namespace covsteer
