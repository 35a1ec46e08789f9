#pragma once

#include <string>
#include <vector>

#include "chance.hpp"
#include "conic/backend.hpp"
#include "conic/program.hpp"
#include "gain.hpp"
#include "lifting.hpp"

namespace covsteer {

enum class SolveStatus { kOptimal, kInfeasible, kNumericalFailure };

const char* to_string(SolveStatus status);

// J(K) = tr(((I + boldB K)' boldQ (I + boldB K) + K' Rbar K) * second moment).
double objective_value(const Matrix& K, const LiftedSystem& lifted);

// E_N Sigma_X E_N' for the closed loop with gain K.
Matrix terminal_covariance(const Matrix& K, const LiftedSystem& lifted);
// ||E_N (I + boldB K) boldA mu0_aug - mu_N||.
double terminal_mean_residual(const Matrix& K, const LiftedSystem& lifted, const Vector& muN);
// Smallest eigenvalue of Sigma_N - E_N Sigma_X E_N'.
double terminal_cov_slack(const Matrix& K, const LiftedSystem& lifted, const Matrix& SigmaN);
// The Schur block [[Sigma_N, G], [G', I]] with G = E_N (I + boldB K) S_half.
Matrix terminal_cov_lmi(const Matrix& K, const LiftedSystem& lifted, const Matrix& SigmaN);
// 1 - ||Sigma_N^{-1/2} G||_2^2, nonnegative iff the LMI holds.
double terminal_cov_norm_margin(const Matrix& K, const LiftedSystem& lifted,
                                const Matrix& SigmaN);

// Dense equality data A x = b over the packed gain.
struct LinearEqualities {
  Matrix A;
  Vector b;
};
LinearEqualities terminal_mean_rows(const LiftedSystem& lifted, const GainLayout& layout,
                                    const Vector& muN);

// Affine LMI in svec form: svec(M(x)) = h - G x.
struct LmiData {
  int order = 0;
  Vector h;
  conic::SparseMatrix G;
};
LmiData terminal_cov_block(const LiftedSystem& lifted, const GainLayout& layout,
                           const Matrix& SigmaN);

// Decision vector [packed K; t]. Cone order: objective epigraph (second
// order), one second-order cone per chance row, then the terminal LMI.
struct SteeringProgram {
  conic::ConicProgram program;
  GainLayout layout;
  // The backend minimises objective_scale * J(K); reports use the unscaled J.
  double objective_scale = 1.0;
  int num_rows = 0;
};

SteeringProgram assemble(const LiftedSystem& lifted, const Vector& muN, const Matrix& SigmaN,
                         const std::vector<DeterministicRow>& rows);

struct SolveReport {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = 0.0;
  std::vector<double> row_residuals;
  double max_row_residual = 0.0;
  int max_row = -1;
  double terminal_mean_residual = 0.0;
  double terminal_cov_slack = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  std::string backend;
  std::string message;
  int num_variables = 0;
};

// Fills the objective and residual fields for a given gain (status untouched).
void evaluate(const Matrix& K, const LiftedSystem& lifted, const Vector& muN,
              const Matrix& SigmaN, const std::vector<DeterministicRow>& rows,
              SolveReport& report);

struct SolveOptions {
  double tolerance = 1e-9;
  int max_iterations = 100;
  bool verbose = false;
};

struct SteeringResult {
  Matrix K;
  SolveReport report;
};

// Tolerances that an optimal report must meet.
inline constexpr double kRowTolerance = 1e-6;
inline constexpr double kMeanTolerance = 1e-6;
inline constexpr double kCovTolerance = 1e-6;

SteeringResult solve(const SteeringProgram& program, const LiftedSystem& lifted,
                     const Vector& muN, const Matrix& SigmaN,
                     const std::vector<DeterministicRow>& rows,
                     const conic::ConicBackend& backend, const SolveOptions& options = {});

}  // namespace covsteer
