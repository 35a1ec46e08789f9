#pragma once

#include <cstddef>
#include <string>

#include "program.hpp"

namespace covsteer::conic {

enum class ConicStatus {
  kOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kMaxIterations,
  kNumericalFailure,
};

const char* to_string(ConicStatus status);

struct IpmSettings {
  double feastol = 1e-9;
  double abstol = 1e-9;
  double reltol = 1e-9;
  int max_iterations = 100;
  // Relative static regularisation of the reduced KKT matrix; refinement
  // steps recover the unregularised solution.
  double static_regularization = 1e-11;
  int refinement_steps = 8;
  // When the full tolerances cannot be reached (stall, breakdown, iteration
  // limit) the best iterate is still reported optimal if it meets these.
  double reduced_feastol = 1e-6;
  double reduced_gaptol = 1e-6;
  int stall_iterations = 4;
  // Upper bound (in doubles) on cached constant Gram blocks of second-order
  // cones; cones beyond the budget are re-multiplied every iteration.
  std::size_t gram_cache_doubles = std::size_t{1} << 25;
  bool verbose = false;
};

struct ConicSolution {
  ConicStatus status = ConicStatus::kNumericalFailure;
  Vector x;
  Vector y;
  Vector s;
  Vector z;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double seconds = 0.0;
  std::string message;
};

// Homogeneous self-dual embedding, Mehrotra predictor-corrector with
// Nesterov-Todd scaling. Infeasibility is reported through certificates:
// primal infeasible means (y, z) with A'y + G'z ~ 0, b'y + h'z = -1.
ConicSolution solve_ipm(const ConicProgram& program, const IpmSettings& settings = {});

}  // namespace covsteer::conic
