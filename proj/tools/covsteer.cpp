// covsteer command line front end. Talks to the library only through the C
// interface.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "covsteer/covsteer.h"

namespace {

enum Exit { kExitOk = 0, kExitFailed = 1, kExitInput = 2, kExitError = 3 };

struct Options {
  std::string scenario;
  std::string mode = "chance";
  std::string out;
  std::string dump;
  long long samples = 0;
  unsigned long long seed = 0;
  bool seed_set = false;
  double tolerance = 0.0;
  bool no_emit = false;
  bool no_simulate = false;
};

int report_error(cs_status_t status, const char* what) {
  std::fprintf(stderr, "covsteer: %s failed: %s: %s\n", what, cs_status_name(status),
               cs_last_error_message());
  switch (status) {
    case CS_ERR_PARSE:
    case CS_ERR_SCHEMA:
    case CS_ERR_VALIDATION:
    case CS_ERR_IO:
    case CS_ERR_INVALID_ARGUMENT:
      return kExitInput;
    default:
      return kExitError;
  }
}

bool parse_mode(const std::string& name, cs_mode_t* mode) {
  if (name == "mean-only") *mode = CS_MODE_MEAN_ONLY;
  else if (name == "cov") *mode = CS_MODE_COV;
  else if (name == "chance") *mode = CS_MODE_CHANCE;
  else return false;
  return true;
}

const char* mode_name(cs_mode_t mode) {
  switch (mode) {
    case CS_MODE_MEAN_ONLY: return "mean-only";
    case CS_MODE_COV: return "cov";
    case CS_MODE_CHANCE: return "chance";
  }
  return "?";
}

const char* solve_status_name(cs_solve_status_t s) {
  switch (s) {
    case CS_SOLVE_OPTIMAL: return "optimal";
    case CS_SOLVE_INFEASIBLE: return "infeasible";
    case CS_SOLVE_NUMERICAL_FAILURE: return "numerical-failure";
  }
  return "?";
}

class Scenario {
 public:
  Scenario() = default;
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;
  ~Scenario() { cs_scenario_destroy(&handle_); }

  cs_status_t load(const Options& opt) {
    cs_status_t st = cs_scenario_load(opt.scenario.c_str(), &handle_);
    if (st != CS_OK) return st;
    if (opt.samples > 0) cs_scenario_set_samples(handle_, opt.samples);
    if (opt.seed_set) cs_scenario_set_seed(handle_, opt.seed);
    if (opt.tolerance > 0.0) cs_scenario_set_tolerance(handle_, opt.tolerance);
    if (!opt.out.empty()) cs_scenario_set_output_dir(handle_, opt.out.c_str());
    return CS_OK;
  }

  cs_scenario_t get() const { return handle_; }

  std::string output_dir() const {
    char buf[4096];
    cs_scenario_output_dir(handle_, buf, sizeof buf);
    return buf;
  }

 private:
  cs_scenario_t handle_ = nullptr;
};

class Result {
 public:
  Result() = default;
  Result(const Result&) = delete;
  Result& operator=(const Result&) = delete;
  ~Result() { cs_result_destroy(&handle_); }
  cs_result_t* out() { return &handle_; }
  cs_result_t get() const { return handle_; }

 private:
  cs_result_t handle_ = nullptr;
};

void print_result(cs_mode_t mode, const Result& r, bool simulated, double seconds) {
  cs_solve_status_t status = CS_SOLVE_NUMERICAL_FAILURE;
  double cost = 0.0, residual = 0.0, slack = 0.0;
  int row = -1, passed = 0;
  cs_result_solve_status(r.get(), &status);
  cs_result_cost(r.get(), &cost);
  cs_result_max_row_residual(r.get(), &residual, &row);
  cs_result_terminal_cov_slack(r.get(), &slack);
  cs_result_checks_passed(r.get(), &passed);
  std::printf("%-10s status=%-17s cost=%.6f max_row=%+.3e (row %d) cov_slack=%+.3e", mode_name(mode),
              solve_status_name(status), cost, residual, row, slack);
  if (simulated) {
    double freq = 0.0;
    if (cs_result_union_violation(r.get(), &freq) == CS_OK) std::printf(" union_violation=%.5f", freq);
  }
  std::printf(" checks=%s time=%.2fs\n", passed ? "pass" : "FAIL", seconds);
}

// Solves (and optionally simulates) one mode; returns the exit code.
int run_mode(const Scenario& sc, cs_mode_t mode, bool simulate, const Options& opt) {
  Result r;
  const auto t0 = std::chrono::steady_clock::now();
  const cs_status_t st = cs_run(sc.get(), mode, simulate ? 1 : 0, r.out());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (st != CS_OK) return report_error(st, "run");
  print_result(mode, r, simulate, seconds);
  if (!opt.no_emit) {
    const std::string dir = sc.output_dir();
    const cs_status_t est = cs_result_emit(r.get(), dir.c_str());
    if (est != CS_OK) return report_error(est, "emit");
    std::printf("%-10s wrote %s/%s/\n", "", dir.c_str(), mode_name(mode));
  }
  int passed = 0;
  cs_result_checks_passed(r.get(), &passed);
  return passed ? kExitOk : kExitFailed;
}

int cmd_validate(const Options& opt) {
  Scenario sc;
  if (cs_status_t st = sc.load(opt); st != CS_OK) return report_error(st, "load");
  int n = 0, nx = 0, nu = 0, nw = 0;
  cs_scenario_dims(sc.get(), &n, &nx, &nu, &nw);
  size_t issues = 0;
  std::vector<char> buf(1 << 16);
  if (cs_status_t st = cs_scenario_validate(sc.get(), &issues, buf.data(), buf.size()); st != CS_OK) {
    return report_error(st, "validate");
  }
  std::printf("%s: N=%d nx=%d nu=%d nw=%d\n", opt.scenario.c_str(), n, nx, nu, nw);
  if (issues == 0) {
    std::printf("valid\n");
    return kExitOk;
  }
  std::printf("%zu issue(s)\n%s", issues, buf.data());
  return kExitInput;
}

int cmd_run(const Options& opt, bool simulate) {
  cs_mode_t mode;
  if (!parse_mode(opt.mode, &mode)) {
    std::fprintf(stderr, "covsteer: unknown mode '%s'\n", opt.mode.c_str());
    return kExitInput;
  }
  Scenario sc;
  if (cs_status_t st = sc.load(opt); st != CS_OK) return report_error(st, "load");
  if (!opt.dump.empty()) {
    if (mode == CS_MODE_MEAN_ONLY) {
      std::fprintf(stderr, "covsteer: mean-only mode has no conic program to dump\n");
      return kExitInput;
    }
    if (cs_status_t st = cs_dump_program(sc.get(), mode, opt.dump.c_str()); st != CS_OK) {
      return report_error(st, "dump");
    }
  }
  return run_mode(sc, mode, simulate, opt);
}

int cmd_run_all(const Options& opt) {
  Scenario sc;
  if (cs_status_t st = sc.load(opt); st != CS_OK) return report_error(st, "load");
  int code = kExitOk;
  for (cs_mode_t mode : {CS_MODE_MEAN_ONLY, CS_MODE_COV, CS_MODE_CHANCE}) {
    const int c = run_mode(sc, mode, !opt.no_simulate, opt);
    if (c > code) code = c;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chance-constrained covariance steering"};
  app.set_version_flag("--version", std::string(cs_version()));
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("scenario", opt.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", opt.out, "Output directory (overrides output.dir)");
    cmd->add_option("--tol", opt.tolerance, "Solver tolerance (overrides solver.tolerance)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--no-emit", opt.no_emit, "Do not write result files");
  };
  auto add_sim = [&opt](CLI::App* cmd) {
    cmd->add_option("-n,--samples", opt.samples, "Monte-Carlo sample count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "Monte-Carlo seed");
  };
  const std::string modes = "Controller: mean-only, cov or chance";

  auto* validate = app.add_subcommand("validate", "Check a scenario against every invariant");
  validate->add_option("scenario", opt.scenario, "Scenario file")->required()->check(CLI::ExistingFile);

  auto* solve = app.add_subcommand("solve", "Solve one controller mode");
  add_common(solve);
  solve->add_option("-m,--mode", opt.mode, modes)->check(CLI::IsMember({"mean-only", "cov", "chance"}));
  solve->add_option("--dump-program", opt.dump, "Write the assembled conic program to this file");

  auto* simulate = app.add_subcommand("simulate", "Solve one mode and validate it by Monte-Carlo");
  add_common(simulate);
  add_sim(simulate);
  simulate->add_option("-m,--mode", opt.mode, modes)->check(CLI::IsMember({"mean-only", "cov", "chance"}));

  auto* run_all = app.add_subcommand("run-all", "Solve and simulate all three modes");
  add_common(run_all);
  add_sim(run_all);
  run_all->add_flag("--no-simulate", opt.no_simulate, "Skip the Monte-Carlo validation");

  CLI11_PARSE(app, argc, argv);
  opt.seed_set = simulate->count("--seed") > 0 || run_all->count("--seed") > 0;

  if (*validate) return cmd_validate(opt);
  if (*solve) return cmd_run(opt, false);
  if (*simulate) return cmd_run(opt, true);
  return cmd_run_all(opt);
}
