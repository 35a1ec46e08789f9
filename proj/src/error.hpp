#pragma once

#include <stdexcept>
#include <string>

#include "covsteer/covsteer.h"

namespace covsteer {

// Mirrors cs_status_t so the C API can forward codes without a lookup table.
enum class ErrorCode : int {
  kOk = CS_OK,
  kDimensionMismatch = CS_ERR_DIMENSION_MISMATCH,
  kNotPsd = CS_ERR_NOT_PSD,
  kNotPd = CS_ERR_NOT_PD,
  kRiskBudgetExceeded = CS_ERR_RISK_BUDGET_EXCEEDED,
  kNotControllable = CS_ERR_NOT_CONTROLLABLE,
  kRiskTooLarge = CS_ERR_RISK_TOO_LARGE,
  kInvalidConstraint = CS_ERR_INVALID_CONSTRAINT,
  kDomainError = CS_ERR_DOMAIN,
  kSqrtFailure = CS_ERR_SQRT_FAILURE,
  kSingularTerminalMap = CS_ERR_SINGULAR_TERMINAL_MAP,
  kInfeasible = CS_ERR_INFEASIBLE,
  kNumericalFailure = CS_ERR_NUMERICAL_FAILURE,
  kParseError = CS_ERR_PARSE,
  kSchemaError = CS_ERR_SCHEMA,
  kValidationError = CS_ERR_VALIDATION,
  kIoError = CS_ERR_IO,
  kInvalidArgument = CS_ERR_INVALID_ARGUMENT,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace covsteer
