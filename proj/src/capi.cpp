#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <string>

#include "covsteer/covsteer.h"
#include "error.hpp"
#include "pipeline.hpp"
#include "scenario.hpp"

struct cs_scenario_s {
  covsteer::Scenario scenario;
};

struct cs_result_s {
  covsteer::RunResult result;
};

namespace {

thread_local std::string g_last_error;

cs_status_t fail(cs_status_t code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

template <typename F>
cs_status_t guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return CS_OK;
  } catch (const covsteer::Error& e) {
    return fail(static_cast<cs_status_t>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CS_ERR_UNKNOWN, "out of memory");
  } catch (const std::exception& e) {
    return fail(CS_ERR_UNKNOWN, e.what());
  } catch (...) {
    return fail(CS_ERR_UNKNOWN, "unknown exception");
  }
}

void copy_out(const std::string& s, char* buf, size_t buf_len) {
  if (!buf || buf_len == 0) return;
  const size_t n = std::min(s.size(), buf_len - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

covsteer::Mode to_mode(cs_mode_t mode) {
  switch (mode) {
    case CS_MODE_MEAN_ONLY: return covsteer::Mode::kMeanOnly;
    case CS_MODE_COV: return covsteer::Mode::kCov;
    case CS_MODE_CHANCE: return covsteer::Mode::kChance;
  }
  throw covsteer::Error(covsteer::ErrorCode::kInvalidArgument, "unknown mode value");
}

#define CS_CHECK_HANDLE(h) \
  if (!(h)) return fail(CS_ERR_INVALID_HANDLE, "null handle")
#define CS_CHECK_OUT(p) \
  if (!(p)) return fail(CS_ERR_INVALID_ARGUMENT, "null output pointer")

}  // namespace

extern "C" {

const char* cs_version(void) { return COVSTEER_VERSION; }

const char* cs_last_error_message(void) { return g_last_error.c_str(); }

cs_status_t cs_scenario_parse(const char* text, cs_scenario_t* out) {
  CS_CHECK_OUT(out);
  *out = nullptr;
  if (!text) return fail(CS_ERR_INVALID_ARGUMENT, "null scenario text");
  return guarded([&] {
    *out = new cs_scenario_s{covsteer::parse_scenario_unchecked(text)};
  });
}

cs_status_t cs_scenario_load(const char* path, cs_scenario_t* out) {
  CS_CHECK_OUT(out);
  *out = nullptr;
  if (!path) return fail(CS_ERR_INVALID_ARGUMENT, "null path");
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw covsteer::Error(covsteer::ErrorCode::kIoError,
                            std::string("cannot open scenario file '") + path + "'");
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    *out = new cs_scenario_s{covsteer::parse_scenario_unchecked(text, path)};
  });
}

cs_status_t cs_scenario_destroy(cs_scenario_t* scenario) {
  if (!scenario) return fail(CS_ERR_INVALID_ARGUMENT, "null handle pointer");
  delete *scenario;
  *scenario = nullptr;
  return CS_OK;
}

cs_status_t cs_scenario_dims(cs_scenario_t scenario, int* horizon, int* nx, int* nu, int* nw) {
  CS_CHECK_HANDLE(scenario);
  const auto& spec = scenario->scenario.spec;
  if (horizon) *horizon = spec.horizon;
  if (nx) *nx = spec.nx();
  if (nu) *nu = spec.nu();
  if (nw) *nw = spec.nw();
  return CS_OK;
}

cs_status_t cs_scenario_validate(cs_scenario_t scenario, size_t* n_issues, char* buf,
                                 size_t buf_len) {
  CS_CHECK_HANDLE(scenario);
  return guarded([&] {
    const auto report = covsteer::validate(scenario->scenario.spec);
    if (n_issues) *n_issues = report.diagnostics.size();
    copy_out(report.to_string(), buf, buf_len);
  });
}

cs_status_t cs_scenario_set_samples(cs_scenario_t scenario, int64_t samples) {
  CS_CHECK_HANDLE(scenario);
  if (samples > 0) scenario->scenario.simulation.samples = samples;
  return CS_OK;
}

cs_status_t cs_scenario_set_seed(cs_scenario_t scenario, uint64_t seed) {
  CS_CHECK_HANDLE(scenario);
  scenario->scenario.simulation.seed = seed;
  return CS_OK;
}

cs_status_t cs_scenario_set_tolerance(cs_scenario_t scenario, double tol) {
  CS_CHECK_HANDLE(scenario);
  if (tol > 0.0) scenario->scenario.solver.tolerance = tol;
  return CS_OK;
}

cs_status_t cs_scenario_set_output_dir(cs_scenario_t scenario, const char* dir) {
  CS_CHECK_HANDLE(scenario);
  if (dir && *dir) scenario->scenario.output.dir = dir;
  return CS_OK;
}

cs_status_t cs_scenario_output_dir(cs_scenario_t scenario, char* buf, size_t buf_len) {
  CS_CHECK_HANDLE(scenario);
  copy_out(scenario->scenario.output.dir, buf, buf_len);
  return CS_OK;
}

cs_status_t cs_run(cs_scenario_t scenario, cs_mode_t mode, int simulate, cs_result_t* out) {
  CS_CHECK_HANDLE(scenario);
  CS_CHECK_OUT(out);
  *out = nullptr;
  return guarded([&] {
    *out = new cs_result_s{covsteer::run(scenario->scenario, to_mode(mode), simulate != 0)};
  });
}

cs_status_t cs_result_destroy(cs_result_t* result) {
  if (!result) return fail(CS_ERR_INVALID_ARGUMENT, "null handle pointer");
  delete *result;
  *result = nullptr;
  return CS_OK;
}

cs_status_t cs_result_solve_status(cs_result_t result, cs_solve_status_t* status) {
  CS_CHECK_HANDLE(result);
  CS_CHECK_OUT(status);
  switch (result->result.report.status) {
    case covsteer::SolveStatus::kOptimal: *status = CS_SOLVE_OPTIMAL; break;
    case covsteer::SolveStatus::kInfeasible: *status = CS_SOLVE_INFEASIBLE; break;
    case covsteer::SolveStatus::kNumericalFailure: *status = CS_SOLVE_NUMERICAL_FAILURE; break;
  }
  return CS_OK;
}

cs_status_t cs_result_cost(cs_result_t result, double* cost) {
  CS_CHECK_HANDLE(result);
  CS_CHECK_OUT(cost);
  *cost = result->result.report.objective;
  return CS_OK;
}

cs_status_t cs_result_checks_passed(cs_result_t result, int* passed) {
  CS_CHECK_HANDLE(result);
  CS_CHECK_OUT(passed);
  *passed = result->result.checks_passed() ? 1 : 0;
  return CS_OK;
}

cs_status_t cs_result_max_row_residual(cs_result_t result, double* residual, int* row) {
  CS_CHECK_HANDLE(result);
  CS_CHECK_OUT(residual);
  const auto& rows = result->result.rows;
  int best = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (best < 0 || rows[i].residual > rows[static_cast<std::size_t>(best)].residual) {
      best = static_cast<int>(i);
    }
  }
  *residual = best < 0 ? 0.0 : rows[static_cast<std::size_t>(best)].residual;
  if (row) *row = best;
  return CS_OK;
}

cs_status_t cs_result_terminal_cov_slack(cs_result_t result, double* slack) {
  CS_CHECK_HANDLE(result);
  CS_CHECK_OUT(slack);
  *slack = result->result.report.terminal_cov_slack;
  return CS_OK;
}

cs_status_t cs_result_union_violation(cs_result_t result, double* frequency) {
  CS_CHECK_HANDLE(result);
  CS_CHECK_OUT(frequency);
  if (!result->result.sim) return fail(CS_ERR_INVALID_ARGUMENT, "result was not simulated");
  *frequency = result->result.sim->union_violation;
  return CS_OK;
}

cs_status_t cs_result_summary_json(cs_result_t result, char* buf, size_t buf_len,
                                   size_t* needed) {
  CS_CHECK_HANDLE(result);
  return guarded([&] {
    const std::string json = covsteer::summary_json(result->result);
    if (needed) *needed = json.size() + 1;
    copy_out(json, buf, buf_len);
  });
}

cs_status_t cs_result_emit(cs_result_t result, const char* dir) {
  CS_CHECK_HANDLE(result);
  if (!dir) return fail(CS_ERR_INVALID_ARGUMENT, "null directory");
  return guarded([&] { covsteer::emit(result->result, dir); });
}

cs_status_t cs_dump_program(cs_scenario_t scenario, cs_mode_t mode, const char* path) {
  CS_CHECK_HANDLE(scenario);
  if (!path) return fail(CS_ERR_INVALID_ARGUMENT, "null path");
  return guarded([&] {
    const auto program = covsteer::build_program(scenario->scenario, to_mode(mode));
    covsteer::conic::write_program(program.program, std::string(path));
  });
}

}  // extern "C"
