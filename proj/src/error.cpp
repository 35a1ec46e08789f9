#include "error.hpp"

namespace covsteer {

const char* error_code_name(ErrorCode code) {
  return cs_status_name(static_cast<cs_status_t>(code));
}

}  // namespace covsteer

extern "C" CS_EXPORT const char* cs_status_name(cs_status_t status) {
  switch (status) {
    case CS_OK: return "Ok";
    case CS_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case CS_ERR_NOT_PSD: return "NotPSD";
    case CS_ERR_NOT_PD: return "NotPD";
    case CS_ERR_RISK_BUDGET_EXCEEDED: return "RiskBudgetExceeded";
    case CS_ERR_NOT_CONTROLLABLE: return "NotControllable";
    case CS_ERR_RISK_TOO_LARGE: return "RiskTooLarge";
    case CS_ERR_INVALID_CONSTRAINT: return "InvalidConstraint";
    case CS_ERR_DOMAIN: return "DomainError";
    case CS_ERR_SQRT_FAILURE: return "SqrtFailure";
    case CS_ERR_SINGULAR_TERMINAL_MAP: return "SingularTerminalMap";
    case CS_ERR_INFEASIBLE: return "Infeasible";
    case CS_ERR_NUMERICAL_FAILURE: return "NumericalFailure";
    case CS_ERR_PARSE: return "ParseError";
    case CS_ERR_SCHEMA: return "SchemaError";
    case CS_ERR_VALIDATION: return "ValidationError";
    case CS_ERR_IO: return "IoError";
    case CS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case CS_ERR_INVALID_HANDLE: return "InvalidHandle";
    case CS_ERR_UNKNOWN: return "Unknown";
  }
  return "Unknown";
}
