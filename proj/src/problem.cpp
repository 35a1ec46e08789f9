#include "problem.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace covsteer {

namespace {

constexpr double kRiskSlack = 1e-12;

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void add(ValidationReport& report, ErrorCode code, std::string message, int step = -1,
         int constraint = -1) {
  report.diagnostics.push_back({code, std::move(message), step, constraint});
}

bool check_shape(ValidationReport& report, const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                 const std::string& name, int step) {
  if (m.rows() == rows && m.cols() == cols) return true;
  add(report, ErrorCode::kDimensionMismatch,
      name + " has shape " + dims(m) + ", expected " + std::to_string(rows) + "x" +
          std::to_string(cols),
      step);
  return false;
}

void check_psd(ValidationReport& report, const Matrix& m, const std::string& name, int step) {
  const double lambda = min_eigenvalue(m);
  if (lambda < psd_tolerance(m)) {
    add(report, ErrorCode::kNotPsd,
        name + " is not positive semidefinite (min eigenvalue " + std::to_string(lambda) + ")",
        step);
  }
}

void check_pd(ValidationReport& report, const Matrix& m, const std::string& name, int step) {
  const double lambda = min_eigenvalue(m);
  if (lambda <= pd_tolerance(m)) {
    add(report, ErrorCode::kNotPd,
        name + " is not positive definite (min eigenvalue " + std::to_string(lambda) + ")",
        step);
  }
}

void check_symmetric(ValidationReport& report, const Matrix& m, const std::string& name,
                     int step) {
  // Round-off asymmetry is tolerated: only the symmetric part is used.
  if ((m - m.transpose()).norm() > 1e-6 * (1.0 + m.norm())) {
    add(report, ErrorCode::kNotPsd, name + " is not symmetric", step);
  }
}

// Input-to-terminal-state map [Phi(N,1)B_0, ..., B_{N-1}].
Matrix terminal_input_map(const ProblemSpec& spec) {
  const int n = spec.horizon;
  const int nx = spec.nx();
  const int nu = spec.nu();
  Matrix map = Matrix::Zero(nx, n * nu);
  Matrix phi = Matrix::Identity(nx, nx);
  for (int i = n - 1; i >= 0; --i) {
    map.middleCols(i * nu, nu) = phi * spec.systems[i].B;
    phi = phi * spec.systems[i].A;
  }
  return map;
}

}  // namespace

int ProblemSpec::num_chance_rows() const {
  std::size_t rows = stacked.size();
  for (const auto& h : halfspaces) rows += h.steps.size();
  return static_cast<int>(rows);
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& d : diagnostics) {
    out << error_code_name(d.code);
    if (d.step >= 0) out << "(k=" << d.step << ")";
    if (d.constraint >= 0) out << "(j=" << d.constraint << ")";
    out << ": " << d.message << "\n";
  }
  return out.str();
}

ValidationReport validate(const ProblemSpec& spec) {
  ValidationReport report;
  const int n = spec.horizon;
  if (n <= 0) {
    add(report, ErrorCode::kDimensionMismatch, "horizon must be a positive integer");
    return report;
  }
  if (static_cast<int>(spec.systems.size()) != n || static_cast<int>(spec.costs.size()) != n) {
    add(report, ErrorCode::kDimensionMismatch,
        "expected " + std::to_string(n) + " step systems and cost weights, got " +
            std::to_string(spec.systems.size()) + " and " + std::to_string(spec.costs.size()));
    return report;
  }
  const int nx = spec.nx();
  const int nu = spec.nu();
  const int nw = spec.nw();
  if (nx <= 0 || nu <= 0) {
    add(report, ErrorCode::kDimensionMismatch, "state and input dimensions must be positive");
    return report;
  }

  bool shapes_ok = true;
  for (int k = 0; k < n; ++k) {
    const auto& sys = spec.systems[k];
    const auto& cost = spec.costs[k];
    shapes_ok &= check_shape(report, sys.A, nx, nx, "A", k);
    shapes_ok &= check_shape(report, sys.B, nx, nu, "B", k);
    shapes_ok &= check_shape(report, sys.D, nx, nw, "D", k);
    if (check_shape(report, cost.Q, nx, nx, "Q", k)) {
      check_symmetric(report, cost.Q, "Q", k);
      check_psd(report, cost.Q, "Q", k);
    }
    if (check_shape(report, cost.R, nu, nu, "R", k)) {
      check_symmetric(report, cost.R, "R", k);
      check_pd(report, cost.R, "R", k);
    }
  }

  if (spec.initial.mean.size() != nx) {
    add(report, ErrorCode::kDimensionMismatch, "mu0 must have length " + std::to_string(nx));
  }
  if (spec.terminal.mean.size() != nx) {
    add(report, ErrorCode::kDimensionMismatch, "muN must have length " + std::to_string(nx));
  }
  if (check_shape(report, spec.initial.cov, nx, nx, "Sigma0", -1)) {
    check_symmetric(report, spec.initial.cov, "Sigma0", -1);
    check_psd(report, spec.initial.cov, "Sigma0", -1);
  }
  if (check_shape(report, spec.terminal.cov, nx, nx, "SigmaN", -1)) {
    check_symmetric(report, spec.terminal.cov, "SigmaN", -1);
    check_pd(report, spec.terminal.cov, "SigmaN", -1);
  }

  if (shapes_ok) {
    const Matrix map = terminal_input_map(spec);
    bool controllable = map.cols() >= nx;
    double smin = 0.0;
    double smax = 0.0;
    if (controllable) {
      Eigen::JacobiSVD<Matrix> svd(map);
      const Vector& sv = svd.singularValues();
      smax = sv(0);
      smin = sv(nx - 1);
      controllable = smax > 0.0 && smin > 1e-8 * smax;
    }
    if (!controllable) {
      add(report, ErrorCode::kNotControllable,
          "terminal input map is rank deficient (sigma_min " + std::to_string(smin) +
              ", sigma_max " + std::to_string(smax) + ")");
    }
  }

  double explicit_sum = 0.0;
  for (std::size_t j = 0; j < spec.halfspaces.size(); ++j) {
    const auto& h = spec.halfspaces[j];
    const int jj = static_cast<int>(j);
    if (h.a.size() != nx) {
      add(report, ErrorCode::kDimensionMismatch,
          "halfspace normal must have length " + std::to_string(nx), -1, jj);
    } else if (h.a.norm() == 0.0) {
      add(report, ErrorCode::kInvalidConstraint, "halfspace normal is zero", -1, jj);
    }
    if (h.steps.empty()) {
      add(report, ErrorCode::kInvalidConstraint, "halfspace has no steps", -1, jj);
    }
    for (int k : h.steps) {
      if (k < 0 || k > n) {
        add(report, ErrorCode::kInvalidConstraint,
            "step " + std::to_string(k) + " outside 0.." + std::to_string(n), k, jj);
      }
    }
    if (h.p_fail) {
      if (!(*h.p_fail > 0.0)) {
        add(report, ErrorCode::kInvalidConstraint, "p_fail must be positive", -1, jj);
      } else if (!(*h.p_fail < 0.5)) {
        add(report, ErrorCode::kRiskTooLarge, "p_fail must be < 0.5", -1, jj);
      }
      explicit_sum += *h.p_fail * static_cast<double>(h.steps.size());
    }
  }
  const int first_stacked = static_cast<int>(spec.halfspaces.size());
  for (std::size_t j = 0; j < spec.stacked.size(); ++j) {
    const auto& s = spec.stacked[j];
    const int jj = first_stacked + static_cast<int>(j);
    if (s.alpha.size() != (n + 1) * nx) {
      add(report, ErrorCode::kDimensionMismatch,
          "stacked row must have length " + std::to_string((n + 1) * nx), -1, jj);
    } else if (s.alpha.norm() == 0.0) {
      add(report, ErrorCode::kInvalidConstraint, "stacked row is zero", -1, jj);
    }
    if (s.p_fail) {
      if (!(*s.p_fail > 0.0)) {
        add(report, ErrorCode::kInvalidConstraint, "p_fail must be positive", -1, jj);
      } else if (!(*s.p_fail < 0.5)) {
        add(report, ErrorCode::kRiskTooLarge, "p_fail must be < 0.5", -1, jj);
      }
      explicit_sum += *s.p_fail;
    }
  }

  if (spec.total_risk) {
    const double total = *spec.total_risk;
    if (!(total >= 0.0 && total <= 1.0)) {
      add(report, ErrorCode::kInvalidConstraint, "total risk must lie in [0, 1]");
    } else if (explicit_sum > total * (1.0 + kRiskSlack)) {
      add(report, ErrorCode::kRiskBudgetExceeded,
          "per-row budgets sum to " + std::to_string(explicit_sum) + " > P_fail " +
              std::to_string(total));
    } else {
      try {
        resolve_row_risks(spec);
      } catch (const Error& e) {
        add(report, e.code(), e.what());
      }
    }
  } else {
    bool all_explicit = true;
    for (const auto& h : spec.halfspaces) all_explicit &= h.p_fail.has_value();
    for (const auto& s : spec.stacked) all_explicit &= s.p_fail.has_value();
    if (!all_explicit) {
      add(report, ErrorCode::kInvalidConstraint,
          "rows without p_fail need a total risk budget to share");
    }
  }
  return report;
}

void require_valid(const ProblemSpec& spec) {
  const ValidationReport report = validate(spec);
  if (!report.ok()) throw Error(ErrorCode::kValidationError, report.to_string());
}

std::vector<double> uniform_risk_allocation(double total_risk, int rows) {
  if (rows < 1) throw Error(ErrorCode::kInvalidArgument, "risk allocation needs at least one row");
  if (!(total_risk > 0.0 && total_risk < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "total risk must lie in (0, 1)");
  }
  const double share = total_risk / rows;
  if (!(share < 0.5)) {
    throw Error(ErrorCode::kRiskTooLarge,
                "per-row risk " + std::to_string(share) + " must be < 0.5");
  }
  return std::vector<double>(static_cast<std::size_t>(rows), share);
}

std::vector<double> resolve_row_risks(const ProblemSpec& spec) {
  std::vector<double> risks;
  std::vector<std::size_t> unassigned;
  double used = 0.0;
  auto push = [&](const std::optional<double>& p) {
    if (p) {
      risks.push_back(*p);
      used += *p;
    } else {
      unassigned.push_back(risks.size());
      risks.push_back(0.0);
    }
  };
  for (const auto& h : spec.halfspaces) {
    for (std::size_t i = 0; i < h.steps.size(); ++i) push(h.p_fail);
  }
  for (const auto& s : spec.stacked) push(s.p_fail);
  if (unassigned.empty()) return risks;

  if (!spec.total_risk) {
    throw Error(ErrorCode::kInvalidConstraint,
                "rows without p_fail need a total risk budget to share");
  }
  const double remaining = *spec.total_risk - used;
  if (!(remaining > 0.0)) {
    throw Error(ErrorCode::kRiskBudgetExceeded, "no risk budget left for rows without p_fail");
  }
  const auto shares = uniform_risk_allocation(remaining, static_cast<int>(unassigned.size()));
  for (std::size_t i = 0; i < unassigned.size(); ++i) risks[unassigned[i]] = shares[i];
  return risks;
}

}  // namespace covsteer
