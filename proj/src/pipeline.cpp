#include "pipeline.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "chance.hpp"
#include "lifting.hpp"
#include "mean_steer.hpp"

namespace covsteer {

namespace {

constexpr const char* kSummarySchema = "covsteer-summary/1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double total_risk(const ProblemSpec& spec, const std::vector<DeterministicRow>& rows) {
  if (spec.total_risk) return *spec.total_risk;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.p_fail;
  return sum;
}

std::string describe_row(const DeterministicRow& row, int index) {
  std::string s = "row " + std::to_string(index);
  if (row.step >= 0) {
    s += " (halfspace " + std::to_string(row.constraint) + ", step " + std::to_string(row.step) + ")";
  } else {
    s += " (stacked " + std::to_string(row.constraint) + ")";
  }
  return s;
}

// U = K (boldA mu0_aug + boldD W) has mean K boldA mu0_aug.
Vector input_mean(const Matrix& K, const LiftedSystem& lifted) {
  return K * lifted.open_loop_mean();
}

void add_check(RunResult& r, std::string name, bool passed, std::string detail) {
  r.checks.push_back({std::move(name), passed, std::move(detail)});
}

void monte_carlo_checks(RunResult& r, const std::vector<DeterministicRow>& rows) {
  const SimReport& sim = *r.sim;
  const double n = static_cast<double>(sim.samples);
  const double J = r.report.objective;

  const double cost_margin = 4.0 * sim.cost_stderr + 1e-9 * (1.0 + std::abs(J));
  add_check(r, "mc_cost", std::abs(sim.cost_mean - J) <= cost_margin,
            "sample " + fmt_short(sim.cost_mean) + " vs analytic " + fmt_short(J) + " (margin " +
                fmt_short(cost_margin) + ")");

  const Vector mu = r.moments.step_mean(r.horizon);
  const Matrix sigma = r.moments.step_cov(r.horizon);
  double worst_mean = 0.0;
  bool mean_ok = true;
  for (int i = 0; i < r.nx; ++i) {
    const double margin = 4.0 * std::sqrt(std::max(sigma(i, i), 0.0) / n) + 1e-9 * (1.0 + std::abs(mu(i)));
    const double dev = std::abs(sim.mean.back()(i) - mu(i));
    worst_mean = std::max(worst_mean, dev);
    mean_ok &= dev <= margin;
  }
  add_check(r, "mc_terminal_mean", mean_ok, "max deviation " + fmt_short(worst_mean));

  if (r.mode == Mode::kChance && !rows.empty()) {
    bool rows_ok = true;
    int worst = -1;
    double worst_excess = -1.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const double p = rows[j].p_fail;
      const double bound = p + 3.0 * std::sqrt(p * (1.0 - p) / n);
      const double excess = sim.row_violation[j] - bound;
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = static_cast<int>(j);
      }
      rows_ok &= sim.row_violation[j] <= bound;
    }
    add_check(r, "mc_row_violation", rows_ok,
              "worst " + describe_row(rows[static_cast<std::size_t>(worst)], worst) +
                  " frequency " + fmt_short(sim.row_violation[static_cast<std::size_t>(worst)]));
    const double P = r.total_risk;
    const double bound = P + 3.0 * std::sqrt(P * (1.0 - P) / n);
    add_check(r, "mc_union_violation", sim.union_violation <= bound,
              "frequency " + fmt_short(sim.union_violation) + " bound " + fmt_short(bound));
  }
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::kMeanOnly: return "mean-only";
    case Mode::kCov: return "cov";
    case Mode::kChance: return "chance";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  if (name == "mean-only") return Mode::kMeanOnly;
  if (name == "cov") return Mode::kCov;
  if (name == "chance") return Mode::kChance;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown mode '" + name + "' (expected mean-only, cov or chance)");
}

bool RunResult::checks_passed() const {
  if (report.status != SolveStatus::kOptimal) return false;
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

SteeringProgram build_program(const Scenario& scenario, Mode mode) {
  if (mode == Mode::kMeanOnly) {
    throw Error(ErrorCode::kInvalidArgument, "mean-only mode has no conic program");
  }
  const ProblemSpec& spec = scenario.spec;
  require_valid(spec);
  const LiftedSystem lifted = build_lifted(spec);
  std::vector<DeterministicRow> rows;
  if (mode == Mode::kChance) rows = make_rows(lift_halfspaces(spec, lifted));
  return assemble(lifted, spec.terminal.mean, spec.terminal.cov, rows);
}

RunResult run(const Scenario& scenario, Mode mode, bool simulate,
              const conic::ConicBackend* backend) {
  const ProblemSpec& spec = scenario.spec;
  require_valid(spec);
  const LiftedSystem lifted = build_lifted(spec);
  const std::vector<DeterministicRow> all_rows = make_rows(lift_halfspaces(spec, lifted));

  RunResult r;
  r.mode = mode;
  r.scenario_name = scenario.name;
  r.scenario_hash = scenario.hash;
  r.horizon = spec.horizon;
  r.nx = spec.nx();
  r.nu = spec.nu();
  r.ellipse_sigma = scenario.output.ellipse_sigma;
  r.total_risk = total_risk(spec, all_rows);

  Matrix K;
  if (mode == Mode::kMeanOnly) {
    const MeanPlan plan = solve_mean(lifted, spec.initial.mean, spec.terminal.mean);
    // u_k = Ubar_k through the constant block: K_1 1 = Ubar.
    K = Matrix::Zero(lifted.input_dim(), lifted.stacked_dim());
    K.leftCols(lifted.nx) = plan.Ubar * Vector::Ones(lifted.nx).transpose() / lifted.nx;
    SolveReport& rep = r.report;
    evaluate(K, lifted, spec.terminal.mean, spec.terminal.cov, all_rows, rep);
    rep.backend = "closed-form";
    rep.num_variables = static_cast<int>(plan.Ubar.size());
    if (!all_rows.empty() && rep.max_row_residual > kRowTolerance) {
      rep.status = SolveStatus::kInfeasible;
      rep.message = "chance check failed: " +
                    describe_row(all_rows[static_cast<std::size_t>(rep.max_row)], rep.max_row) +
                    " residual " + fmt_short(rep.max_row_residual);
    } else {
      rep.status = SolveStatus::kOptimal;
      rep.message = "closed-form mean plan";
    }
  } else {
    std::unique_ptr<conic::ConicBackend> owned;
    if (!backend) {
      owned = scenario.backend.empty() ? conic::default_backend()
                                       : conic::make_backend(scenario.backend);
      backend = owned.get();
    }
    const std::vector<DeterministicRow> rows =
        mode == Mode::kChance ? all_rows : std::vector<DeterministicRow>{};
    const SteeringProgram program =
        assemble(lifted, spec.terminal.mean, spec.terminal.cov, rows);
    SteeringResult solved = solve(program, lifted, spec.terminal.mean, spec.terminal.cov, rows,
                                  *backend, scenario.solver);
    K = std::move(solved.K);
    r.report = std::move(solved.report);
    if (r.report.status == SolveStatus::kInfeasible && mode == Mode::kChance &&
        !r.report.row_residuals.empty()) {
      r.report.message += "; most violated at the returned gain: " +
                          describe_row(all_rows[static_cast<std::size_t>(r.report.max_row)],
                                       r.report.max_row);
    }
  }

  for (const auto& row : all_rows) {
    r.rows.push_back({row.constraint, row.step, row.p_fail, row_residual(row, K, lifted)});
  }
  r.policy = recover_L(K, lifted);
  r.moments = closed_moments(K, lifted);
  r.input_mean = input_mean(K, lifted);

  add_check(r, "solve_status", r.report.status == SolveStatus::kOptimal,
            std::string(to_string(r.report.status)) + ": " + r.report.message);
  const bool have_policy = mode == Mode::kMeanOnly || r.report.status != SolveStatus::kInfeasible;
  if (simulate && have_policy) {
    r.sim = monte_carlo(r.policy, spec, all_rows, scenario.simulation);
    monte_carlo_checks(r, all_rows);
    if (mode != Mode::kMeanOnly && r.sim->samples > 1) {
      // Entrywise sampling variance of the covariance estimate, summed into a
      // Frobenius bound on the spectral error.
      const Matrix sigma = r.moments.step_cov(r.horizon);
      double var = 0.0;
      for (int i = 0; i < r.nx; ++i) {
        for (int j = 0; j < r.nx; ++j) {
          var += (sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) /
                 (static_cast<double>(r.sim->samples) - 1.0);
        }
      }
      const double margin = 4.0 * std::sqrt(var);
      const double slack = min_eigenvalue(spec.terminal.cov - r.sim->cov.back());
      add_check(r, "mc_terminal_cov", slack >= -margin,
                "min eig(SigmaN - sample) " + fmt_short(slack) + " margin " + fmt_short(margin));
    }
  }
  return r;
}

std::string summary_json(const RunResult& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema"] = kSummarySchema;
  j["version"] = COVSTEER_VERSION;
  j["scenario"] = {{"name", r.scenario_name}, {"hash", r.scenario_hash}};
  j["mode"] = to_string(r.mode);
  j["dims"] = {{"horizon", r.horizon}, {"nx", r.nx}, {"nu", r.nu}};
  const SolveReport& s = r.report;
  j["solve"] = {
      {"status", to_string(s.status)},
      {"message", s.message},
      {"backend", s.backend},
      {"objective", s.objective},
      {"iterations", s.iterations},
      {"num_variables", s.num_variables},
      {"terminal_mean_residual", s.terminal_mean_residual},
      {"terminal_cov_slack", s.terminal_cov_slack},
  };
  ordered_json rows = ordered_json::array();
  int max_row = -1;
  double max_res = 0.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    rows.push_back({{"constraint", row.constraint},
                    {"step", row.step},
                    {"p_fail", row.p_fail},
                    {"residual", row.residual}});
    if (max_row < 0 || row.residual > max_res) {
      max_row = static_cast<int>(i);
      max_res = row.residual;
    }
  }
  j["chance"] = {{"total_risk", r.total_risk},
                 {"max_residual", max_row < 0 ? 0.0 : max_res},
                 {"max_row", max_row},
                 {"rows", rows}};
  if (r.sim) {
    const SimReport& m = *r.sim;
    j["simulation"] = {{"samples", m.samples},
                       {"seed", m.seed},
                       {"rng", m.rng},
                       {"cost_mean", m.cost_mean},
                       {"cost_stderr", m.cost_stderr},
                       {"union_violation", m.union_violation},
                       {"row_violation", m.row_violation}};
  } else {
    j["simulation"] = nullptr;
  }
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  j["checks"] = checks;
  j["checks_passed"] = r.checks_passed();
  return j.dump(2) + "\n";
}

namespace {

class CsvFile {
 public:
  explicit CsvFile(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
  ~CsvFile() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) {
      throw Error(ErrorCode::kIoError, "write failed for '" + path_.string() + "'");
    }
  }
  std::ofstream& stream() { return out_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_header(std::ostream& out, const char* first, const std::string& prefix, int n) {
  out << first;
  for (int i = 0; i < n; ++i) out << "," << prefix << i;
}

void write_cov_header(std::ostream& out, int nx) {
  out << "step";
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nx; ++j) out << ",s_" << i << "_" << j;
  }
}

void write_cov_row(std::ostream& out, const Matrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out << "," << fmt(m(i, j));
  }
}

}  // namespace

void emit(const RunResult& r, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(dir) / to_string(r.mode);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create '" + base.string() + "': " + ec.message());

  {
    CsvFile f(base / "trajectory.csv");
    auto& out = f.stream();
    write_header(out, "step", "mu_", r.nx);
    for (int i = 0; i < r.nu; ++i) out << ",u_" << i;
    out << "\n";
    for (int k = 0; k <= r.horizon; ++k) {
      out << k;
      const Vector mu = r.moments.step_mean(k);
      for (int i = 0; i < r.nx; ++i) out << "," << fmt(mu(i));
      for (int i = 0; i < r.nu; ++i) {
        out << ",";
        if (k < r.horizon) out << fmt(r.input_mean(k * r.nu + i));
      }
      out << "\n";
    }
  }
  {
    CsvFile f(base / "covariance.csv");
    auto& out = f.stream();
    write_cov_header(out, r.nx);
    out << "\n";
    for (int k = 0; k <= r.horizon; ++k) {
      out << k;
      write_cov_row(out, symmetric_part(r.moments.step_cov(k)));
      out << "\n";
    }
  }
  if (r.nx >= 2) {
    // Ellipse of the first two state components at ellipse_sigma standard
    // deviations: semi-axes along the eigenvectors, angle of the major axis.
    CsvFile f(base / "ellipses.csv");
    auto& out = f.stream();
    out << "step,center_0,center_1,semi_major,semi_minor,angle_rad,sigma\n";
    for (int k = 0; k <= r.horizon; ++k) {
      const Matrix c = symmetric_part(r.moments.step_cov(k)).topLeftCorner(2, 2);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
      const Vector ev = eig.eigenvalues().cwiseMax(0.0);
      const Vector major = eig.eigenvectors().col(1);
      const Vector mu = r.moments.step_mean(k);
      out << k << "," << fmt(mu(0)) << "," << fmt(mu(1)) << ","
          << fmt(r.ellipse_sigma * std::sqrt(ev(1))) << ","
          << fmt(r.ellipse_sigma * std::sqrt(ev(0))) << ","
          << fmt(std::atan2(major(1), major(0))) << "," << fmt(r.ellipse_sigma) << "\n";
    }
  }
  if (r.sim) {
    CsvFile f(base / "mc_moments.csv");
    auto& out = f.stream();
    write_header(out, "step", "mu_", r.nx);
    for (int i = 0; i < r.nx; ++i) {
      for (int j = 0; j < r.nx; ++j) out << ",s_" << i << "_" << j;
    }
    out << "\n";
    for (int k = 0; k <= r.horizon; ++k) {
      out << k;
      for (int i = 0; i < r.nx; ++i) out << "," << fmt(r.sim->mean[k](i));
      write_cov_row(out, r.sim->cov[k]);
      out << "\n";
    }
    if (!r.sim->terminal_samples.empty()) {
      CsvFile s(base / "samples.csv");
      auto& so = s.stream();
      write_header(so, "sample", "x_", r.nx);
      so << "\n";
      for (std::size_t i = 0; i < r.sim->terminal_samples.size(); ++i) {
        so << i;
        for (int c = 0; c < r.nx; ++c) so << "," << fmt(r.sim->terminal_samples[i](c));
        so << "\n";
      }
    }
  }
  {
    CsvFile f(base / "summary.json");
    f.stream() << summary_json(r);
  }
}

}  // namespace covsteer
