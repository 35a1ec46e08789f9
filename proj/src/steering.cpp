#include "steering.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace covsteer {

using conic::Cone;
using conic::ConeKind;
using Triplet = Eigen::Triplet<double>;

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

Matrix closed_loop(const Matrix& K, const LiftedSystem& lifted) {
  Matrix m = lifted.boldB * K;
  m.diagonal().array() += 1.0;
  return m;
}

void check_gain(const Matrix& K, const LiftedSystem& lifted) {
  if (K.rows() != lifted.input_dim() || K.cols() != lifted.stacked_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "gain K must be N nu x (N+2) nx");
  }
}

}  // namespace

double objective_value(const Matrix& K, const LiftedSystem& lifted) {
  check_gain(K, lifted);
  const Matrix mom = lifted.second_moment();
  const Matrix cl = closed_loop(K, lifted);
  const Matrix state = cl.transpose() * lifted.boldQ * cl;
  const Matrix input = K.transpose() * lifted.Rbar * K;
  return ((state + input).cwiseProduct(mom)).sum();
}

Matrix terminal_covariance(const Matrix& K, const LiftedSystem& lifted) {
  check_gain(K, lifted);
  const Matrix g = lifted.boldEN * closed_loop(K, lifted) * lifted.S_half;
  return symmetric_part(g * g.transpose());
}

double terminal_mean_residual(const Matrix& K, const LiftedSystem& lifted, const Vector& muN) {
  check_gain(K, lifted);
  const Vector m = lifted.open_loop_mean();
  return (lifted.boldEN * (m + lifted.boldB * (K * m)) - muN).norm();
}

double terminal_cov_slack(const Matrix& K, const LiftedSystem& lifted, const Matrix& SigmaN) {
  return min_eigenvalue(SigmaN - terminal_covariance(K, lifted));
}

Matrix terminal_cov_lmi(const Matrix& K, const LiftedSystem& lifted, const Matrix& SigmaN) {
  check_gain(K, lifted);
  const int nx = lifted.nx;
  const int d = lifted.stacked_dim();
  const Matrix g = lifted.boldEN * closed_loop(K, lifted) * lifted.S_half;
  Matrix m(nx + d, nx + d);
  m.topLeftCorner(nx, nx) = SigmaN;
  m.topRightCorner(nx, d) = g;
  m.bottomLeftCorner(d, nx) = g.transpose();
  m.bottomRightCorner(d, d).setIdentity();
  return m;
}

double terminal_cov_norm_margin(const Matrix& K, const LiftedSystem& lifted,
                                const Matrix& SigmaN) {
  check_gain(K, lifted);
  const Matrix root = psd_sqrt(SigmaN);
  const Matrix g = lifted.boldEN * closed_loop(K, lifted) * lifted.S_half;
  const Matrix scaled = root.llt().solve(g);
  const double sigma = Eigen::JacobiSVD<Matrix>(scaled).singularValues()(0);
  return 1.0 - sigma * sigma;
}

LinearEqualities terminal_mean_rows(const LiftedSystem& lifted, const GainLayout& layout,
                                    const Vector& muN) {
  const int nx = lifted.nx;
  const Vector m = lifted.open_loop_mean();
  const Matrix eb = lifted.boldEN * lifted.boldB;
  LinearEqualities out;
  out.A = Matrix::Zero(nx, layout.size());
  for (int i = 0; i < layout.size(); ++i) {
    const auto [r, c] = layout.entry(i);
    out.A.col(i) = eb.col(r) * m(c);
  }
  out.b = muN - lifted.boldEN * m;
  return out;
}

LmiData terminal_cov_block(const LiftedSystem& lifted, const GainLayout& layout,
                           const Matrix& SigmaN) {
  const int nx = lifted.nx;
  const int d = lifted.stacked_dim();
  const int order = nx + d;
  LmiData out;
  out.order = order;
  out.h = conic::svec(terminal_cov_lmi(Matrix::Zero(layout.rows(), layout.cols()), lifted,
                                       SigmaN));
  const Matrix eb = lifted.boldEN * lifted.boldB;
  const Matrix& s = lifted.S_half;
  // d/dK_rc of the lower-left block G' is S[c, :]' eb[:, r]'.
  std::vector<Triplet> triplets;
  for (int i = 0; i < layout.size(); ++i) {
    const auto [r, c] = layout.entry(i);
    for (int row = 0; row < nx; ++row) {
      const double e = eb(row, r);
      if (e == 0.0) continue;
      for (int a = 0; a < d; ++a) {
        const double v = s(c, a);
        if (v == 0.0) continue;
        triplets.emplace_back(conic::svec_index(nx + a, row, order), i,
                              -std::numbers::sqrt2 * e * v);
      }
    }
  }
  out.G.resize(order * (order + 1) / 2, layout.size());
  out.G.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SteeringProgram assemble(const LiftedSystem& lifted, const Vector& muN, const Matrix& SigmaN,
                         const std::vector<DeterministicRow>& rows) {
  if (muN.size() != lifted.nx || SigmaN.rows() != lifted.nx || SigmaN.cols() != lifted.nx) {
    throw Error(ErrorCode::kDimensionMismatch, "assemble: terminal moments have wrong size");
  }
  SteeringProgram out{{}, GainLayout(lifted.horizon, lifted.nx, lifted.nu), 1.0,
                      static_cast<int>(rows.size())};
  const GainLayout& layout = out.layout;
  const int n = layout.size();
  const int nvar = n + 1;
  const int t = n;
  const int d = lifted.stacked_dim();
  conic::ConicProgram& p = out.program;

  p.c = Vector::Unit(nvar, t);

  const LinearEqualities eq = terminal_mean_rows(lifted, layout, muN);
  {
    Matrix a = Matrix::Zero(eq.A.rows(), nvar);
    a.leftCols(n) = eq.A;
    p.A = a.sparseView(0.0);
    p.A.makeCompressed();
  }
  p.b = eq.b;

  // Objective J = x' P x + q' x + r0 with P = T (x) Mom restricted to the
  // structural entries.
  const Matrix mom = lifted.second_moment();
  const Matrix bt = lifted.boldB.transpose();
  const Matrix tmat = symmetric_part(bt * lifted.boldQ * lifted.boldB + lifted.Rbar);
  const Matrix cross = 2.0 * bt * lifted.boldQ * mom;
  const double r0 = (lifted.boldQ.cwiseProduct(mom)).sum();
  out.objective_scale = 1.0 / std::max(1.0, std::abs(r0));
  const double sc = out.objective_scale;
  Matrix pmat(n, n);
  Vector q(n);
  for (int j = 0; j < n; ++j) {
    const auto [rj, cj] = layout.entry(j);
    q(j) = sc * cross(rj, cj);
    for (int i = j; i < n; ++i) {
      const auto [ri, ci] = layout.entry(i);
      pmat(i, j) = sc * tmat(ri, rj) * mom(ci, cj);
      pmat(j, i) = pmat(i, j);
    }
  }
  Matrix f = psd_sqrt(pmat);
  // Gains that act identically (the columns of K1 only matter through K1 1)
  // give identical columns of P; make their factor columns identical too so
  // the backend can merge them exactly.
  {
    std::map<std::vector<double>, int> seen;
    for (int i = 0; i < n; ++i) {
      std::vector<double> key(pmat.col(i).data(), pmat.col(i).data() + n);
      key.push_back(q(i));
      const auto [it, inserted] = seen.emplace(std::move(key), i);
      if (!inserted) f.col(i) = f.col(it->second);
    }
  }

  std::vector<Triplet> g;
  std::vector<double> h;
  auto add_row = [&](const Vector& coeffs, double tcoef, double rhs) {
    const int row = static_cast<int>(h.size());
    for (int i = 0; i < coeffs.size(); ++i) {
      if (coeffs(i) != 0.0) g.emplace_back(row, i, coeffs(i));
    }
    if (tcoef != 0.0) g.emplace_back(row, t, tcoef);
    h.push_back(rhs);
  };

  // ||(2 F x, u - 1)|| <= u + 1 with u = t - q'x - r0, i.e. x'Px <= u.
  add_row(q, -1.0, 1.0 - sc * r0);
  for (int a = 0; a < n; ++a) add_row(-2.0 * f.row(a).transpose(), 0.0, 0.0);
  add_row(q, -1.0, -sc * r0 - 1.0);
  p.cones.push_back({ConeKind::kSecondOrder, n + 2});

  // Chance rows: (beta - alpha'(I + boldB K) m, z S (I + boldB K)' alpha) in Q.
  const Vector m = lifted.open_loop_mean();
  const Matrix& s = lifted.S_half;
  for (const auto& row : rows) {
    const double norm = row.alpha.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::kInvalidConstraint, "assemble: zero chance row");
    const Vector alpha = row.alpha / norm;
    const double beta = row.beta / norm;
    const Vector cvec = bt * alpha;
    Vector head = Vector::Zero(n);
    Matrix tail = Matrix::Zero(d, n);
    for (int i = 0; i < n; ++i) {
      const auto [r, c] = layout.entry(i);
      if (cvec(r) == 0.0) continue;
      head(i) = cvec(r) * m(c);
      tail.col(i) = -row.z * cvec(r) * s.col(c);
    }
    add_row(head, 0.0, beta - alpha.dot(m));
    const Vector tail_h = row.z * (s * alpha);
    for (int a = 0; a < d; ++a) add_row(tail.row(a).transpose(), 0.0, tail_h(a));
    p.cones.push_back({ConeKind::kSecondOrder, d + 1});
  }

  const LmiData lmi = terminal_cov_block(lifted, layout, SigmaN);
  const int offset = static_cast<int>(h.size());
  for (int col = 0; col < lmi.G.outerSize(); ++col) {
    for (conic::SparseMatrix::InnerIterator it(lmi.G, col); it; ++it) {
      g.emplace_back(offset + it.row(), it.col(), it.value());
    }
  }
  h.insert(h.end(), lmi.h.data(), lmi.h.data() + lmi.h.size());
  p.cones.push_back({ConeKind::kPsd, lmi.order});

  p.h = Eigen::Map<const Vector>(h.data(), static_cast<Eigen::Index>(h.size()));
  p.G.resize(static_cast<Eigen::Index>(h.size()), nvar);
  p.G.setFromTriplets(g.begin(), g.end());
  p.G.makeCompressed();
  p.check();
  return out;
}

void evaluate(const Matrix& K, const LiftedSystem& lifted, const Vector& muN,
              const Matrix& SigmaN, const std::vector<DeterministicRow>& rows,
              SolveReport& report) {
  report.objective = objective_value(K, lifted);
  report.row_residuals.clear();
  report.max_row = -1;
  report.max_row_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const double r = row_residual(rows[j], K, lifted);
    report.row_residuals.push_back(r);
    if (r > report.max_row_residual) {
      report.max_row_residual = r;
      report.max_row = static_cast<int>(j);
    }
  }
  if (rows.empty()) report.max_row_residual = 0.0;
  report.terminal_mean_residual = terminal_mean_residual(K, lifted, muN);
  report.terminal_cov_slack = terminal_cov_slack(K, lifted, SigmaN);
}

SteeringResult solve(const SteeringProgram& program, const LiftedSystem& lifted,
                     const Vector& muN, const Matrix& SigmaN,
                     const std::vector<DeterministicRow>& rows,
                     const conic::ConicBackend& backend, const SolveOptions& options) {
  conic::IpmSettings settings;
  settings.feastol = options.tolerance;
  settings.abstol = options.tolerance;
  settings.reltol = options.tolerance;
  settings.max_iterations = options.max_iterations;
  settings.verbose = options.verbose;
  const conic::ConicSolution sol = backend.solve(program.program, settings);

  SteeringResult out;
  SolveReport& rep = out.report;
  rep.backend = backend.name();
  rep.iterations = sol.iterations;
  rep.seconds = sol.seconds;
  rep.num_variables = program.layout.size();
  rep.message = std::string(conic::to_string(sol.status)) + ": " + sol.message;

  const int n = program.layout.size();
  if (sol.x.size() == n + 1 && sol.status != conic::ConicStatus::kPrimalInfeasible) {
    out.K = program.layout.unpack(sol.x.head(n));
  } else {
    out.K = Matrix::Zero(program.layout.rows(), program.layout.cols());
  }
  evaluate(out.K, lifted, muN, SigmaN, rows, rep);

  switch (sol.status) {
    case conic::ConicStatus::kOptimal: {
      const bool ok = rep.max_row_residual <= kRowTolerance &&
                      rep.terminal_mean_residual <= kMeanTolerance * (1.0 + muN.norm()) &&
                      rep.terminal_cov_slack >= -kCovTolerance;
      rep.status = ok ? SolveStatus::kOptimal : SolveStatus::kNumericalFailure;
      if (!ok) rep.message += "; residual check failed at the returned gain";
      break;
    }
    case conic::ConicStatus::kPrimalInfeasible:
      rep.status = SolveStatus::kInfeasible;
      break;
    default:
      rep.status = SolveStatus::kNumericalFailure;
      break;
  }
  return out;
}

}  // namespace covsteer
