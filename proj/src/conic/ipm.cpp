#include "ipm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <map>
#include <cmath>
#include <cstdio>

#include "../error.hpp"
#include "cones.hpp"

namespace covsteer::conic {

const char* to_string(ConicStatus status) {
  switch (status) {
    case ConicStatus::kOptimal: return "optimal";
    case ConicStatus::kPrimalInfeasible: return "primal-infeasible";
    case ConicStatus::kDualInfeasible: return "dual-infeasible";
    case ConicStatus::kMaxIterations: return "max-iterations";
    case ConicStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

// Reduced KKT system
//   [ 0  A'  G'   ] [x]   [r1]
//   [ A  0   0    ] [y] = [r2]
//   [ G  0  -W'W  ] [z]   [r3]
// eliminated to H = G' W^{-1} W^{-T} G and a Schur complement on A.
class ReducedKkt {
 public:
  ReducedKkt(const ConicProgram& program, const NtScaling& scaling, const IpmSettings& settings)
      : program_(program), scaling_(scaling), settings_(settings) {
    a_dense_ = Matrix(program.A);
    build_blocks();
  }

  bool factor() {
    const int n = program_.num_vars();
    Matrix h = Matrix::Zero(n, n);
    for (const auto& block : blocks_) accumulate(block, h);
    // Absolute shift fixed at the first factorisation; escalated only when
    // round-off makes the Cholesky fail.
    if (base_ == 0.0) base_ = std::max(1.0, h.diagonal().maxCoeff());
    double reg = settings_.static_regularization * base_;
    for (int attempt = 0; attempt < 12; ++attempt, reg *= 10.0) {
      Matrix hr = h;
      hr.diagonal().array() += reg;
      h_llt_.compute(hr);
      if (h_llt_.info() == Eigen::Success) break;
    }
    if (h_llt_.info() != Eigen::Success) return false;
    if (program_.num_eq() > 0) {
      hinv_at_ = h_llt_.solve(a_dense_.transpose());
      Matrix schur = a_dense_ * hinv_at_;
      schur = symmetric_part(schur);
      const double sbase = std::max(1e-300, schur.diagonal().maxCoeff());
      double sreg = 0.0;
      for (int attempt = 0; attempt < 6; ++attempt) {
        Matrix sr = schur;
        sr.diagonal().array() += sreg;
        s_llt_.compute(sr);
        if (s_llt_.info() == Eigen::Success) break;
        sreg = sreg == 0.0 ? 1e-14 * sbase : sreg * 100.0;
      }
      if (s_llt_.info() != Eigen::Success) return false;
    }
    return true;
  }

  // Solve with iterative refinement against the unregularised operator.
  void solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& x, Vector& y,
             Vector& z) const {
    solve_once(r1, r2, r3, x, y, z);
    double best = residual(r1, r2, r3, x, y, z, e1_, e2_, e3_);
    for (int i = 0; i < settings_.refinement_steps && best > 1e-15; ++i) {
      Vector dx;
      Vector dy;
      Vector dz;
      solve_once(e1_, e2_, e3_, dx, dy, dz);
      Vector xn = x + dx;
      Vector yn = y + dy;
      Vector zn = z + dz;
      Vector f1;
      Vector f2;
      Vector f3;
      const double res = residual(r1, r2, r3, xn, yn, zn, f1, f2, f3);
      if (!(res < best)) break;
      best = res;
      x.swap(xn);
      y.swap(yn);
      z.swap(zn);
      e1_.swap(f1);
      e2_.swap(f2);
      e3_.swap(f3);
    }
  }

 private:
  struct Block {
    int cone = 0;
    ConeKind kind = ConeKind::kNonnegative;
    std::vector<int> rows;  // local row indices with structural nonzeros
    std::vector<int> cols;  // global columns touched by the cone
    bool all_cols = false;  // cols == 0..n-1
    bool has_head = false;  // SOC: local row 0 present (always rows[0] then)
    Matrix g;               // dense G restricted to rows x cols
    Matrix gram_j;          // SOC: g' J g, cached when within budget
  };

  void build_blocks() {
    const auto& cones = program_.cones;
    const auto off = cone_offsets(cones);
    const int n = program_.num_vars();
    const int m = program_.cone_dim();
    std::vector<int> cone_of_row(static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < cones.size(); ++k) {
      std::fill(cone_of_row.begin() + off[k], cone_of_row.begin() + off[k + 1],
                static_cast<int>(k));
    }
    std::vector<std::vector<char>> used(cones.size());
    std::vector<std::vector<int>> cols(cones.size());
    for (std::size_t k = 0; k < cones.size(); ++k) used[k].assign(cones[k].dim(), 0);
    const SparseMatrix& g = program_.G;
    for (int col = 0; col < n; ++col) {
      for (SparseMatrix::InnerIterator it(g, col); it; ++it) {
        if (it.value() == 0.0) continue;
        const int k = cone_of_row[it.row()];
        used[k][it.row() - off[k]] = 1;
        if (cols[k].empty() || cols[k].back() != col) cols[k].push_back(col);
      }
    }
    std::size_t cached = 0;
    for (std::size_t k = 0; k < cones.size(); ++k) {
      if (cols[k].empty()) continue;
      Block block;
      block.cone = static_cast<int>(k);
      block.kind = cones[k].kind;
      std::vector<int> local_pos(used[k].size(), -1);
      for (int r = 0; r < static_cast<int>(used[k].size()); ++r) {
        if (used[k][r]) {
          local_pos[r] = static_cast<int>(block.rows.size());
          block.rows.push_back(r);
        }
      }
      block.cols = std::move(cols[k]);
      block.all_cols = static_cast<int>(block.cols.size()) == n;
      block.has_head = !block.rows.empty() && block.rows.front() == 0;
      block.g = Matrix::Zero(static_cast<Eigen::Index>(block.rows.size()),
                             static_cast<Eigen::Index>(block.cols.size()));
      for (int j = 0; j < static_cast<int>(block.cols.size()); ++j) {
        for (SparseMatrix::InnerIterator it(g, block.cols[j]); it; ++it) {
          if (it.row() < off[k] || it.row() >= off[k + 1]) continue;
          const int pos = local_pos[it.row() - off[k]];
          if (pos >= 0) block.g(pos, j) = it.value();
        }
      }
      if (block.kind == ConeKind::kSecondOrder) {
        const std::size_t size = block.cols.size() * block.cols.size();
        if (cached + size <= settings_.gram_cache_doubles) {
          cached += size;
          block.gram_j = soc_gram(block);
        }
      }
      blocks_.push_back(std::move(block));
    }
  }

  // g' J g for a second-order block (full symmetric).
  static Matrix soc_gram(const Block& block) {
    const Eigen::Index c = block.g.cols();
    Matrix out = Matrix::Zero(c, c);
    const Eigen::Index tail_start = block.has_head ? 1 : 0;
    const auto tail = block.g.bottomRows(block.g.rows() - tail_start);
    out.selfadjointView<Eigen::Lower>().rankUpdate(tail.transpose(), -1.0);
    if (block.has_head) {
      out.selfadjointView<Eigen::Lower>().rankUpdate(block.g.row(0).transpose(), 1.0);
    }
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    return out;
  }

  void accumulate(const Block& block, Matrix& h) const {
    Matrix hk;
    if (block.kind == ConeKind::kSecondOrder) {
      const double eta = scaling_.soc_eta(block.cone);
      const Vector jw_full = scaling_.soc_jw(block.cone);
      Vector jw(static_cast<Eigen::Index>(block.rows.size()));
      for (std::size_t i = 0; i < block.rows.size(); ++i) jw(i) = jw_full(block.rows[i]);
      const Vector u = block.g.transpose() * jw;
      const Eigen::Index c = block.g.cols();
      hk = Matrix::Zero(c, c);
      // W^{-1}W^{-T} = (2 v v' - J) / eta^2, v = J wbar.
      hk.selfadjointView<Eigen::Lower>().rankUpdate(u, 2.0);
      if (block.gram_j.size() > 0) {
        hk.triangularView<Eigen::Lower>() -= block.gram_j;
      } else {
        const Eigen::Index tail_start = block.has_head ? 1 : 0;
        const auto tail = block.g.bottomRows(block.g.rows() - tail_start);
        hk.selfadjointView<Eigen::Lower>().rankUpdate(tail.transpose(), 1.0);
        if (block.has_head) {
          hk.selfadjointView<Eigen::Lower>().rankUpdate(block.g.row(0).transpose(), -1.0);
        }
      }
      hk /= eta * eta;
    } else {
      const Matrix mw = scaling_.inverse_gram_block(block.cone, block.rows);
      hk = block.g.transpose() * (mw * block.g);
    }
    if (block.all_cols) {
      h.triangularView<Eigen::Lower>() += hk;
    } else {
      const auto& cols = block.cols;
      const Eigen::Index c = static_cast<Eigen::Index>(cols.size());
      for (Eigen::Index j = 0; j < c; ++j) {
        for (Eigen::Index i = j; i < c; ++i) h(cols[i], cols[j]) += hk(i, j);
      }
    }
  }

  void solve_once(const Vector& r1, const Vector& r2, const Vector& r3, Vector& x, Vector& y,
                  Vector& z) const {
    const Vector t = scaling_.apply_winv(scaling_.apply_winvt(r3));
    const Vector rhs = r1 + program_.G.transpose() * t;
    const Vector hr = h_llt_.solve(rhs);
    if (program_.num_eq() > 0) {
      y = s_llt_.solve(a_dense_ * hr - r2);
      x = hr - hinv_at_ * y;
    } else {
      y.resize(0);
      x = hr;
    }
    const Vector gx = program_.G * x;
    z = scaling_.apply_winv(scaling_.apply_winvt(gx)) - t;
  }

  double residual(const Vector& r1, const Vector& r2, const Vector& r3, const Vector& x,
                  const Vector& y, const Vector& z, Vector& e1, Vector& e2, Vector& e3) const {
    e1 = r1 - program_.G.transpose() * z;
    if (program_.num_eq() > 0) {
      e1 -= a_dense_.transpose() * y;
      e2 = r2 - a_dense_ * x;
    } else {
      e2.resize(0);
    }
    e3 = r3 - (program_.G * x - scaling_.apply_wt(scaling_.apply_w(z)));
    // Each block relative to its own right-hand side.
    double res = std::max(e1.lpNorm<Eigen::Infinity>() / (1.0 + r1.lpNorm<Eigen::Infinity>()),
                          e3.lpNorm<Eigen::Infinity>() / (1.0 + r3.lpNorm<Eigen::Infinity>()));
    if (e2.size() > 0) {
      res = std::max(res, e2.lpNorm<Eigen::Infinity>() / (1.0 + r2.lpNorm<Eigen::Infinity>()));
    }
    return res;
  }

  const ConicProgram& program_;
  const NtScaling& scaling_;
  const IpmSettings& settings_;
  Matrix a_dense_;
  std::vector<Block> blocks_;
  Eigen::LLT<Matrix> h_llt_;
  double base_ = 0.0;
  Matrix hinv_at_;
  Eigen::LLT<Matrix> s_llt_;
  mutable Vector e1_;
  mutable Vector e2_;
  mutable Vector e3_;
};

struct Direction {
  Vector dx;
  Vector dy;
  Vector dz;
  Vector ds;
  Vector ws;  // W^{-T} ds
  Vector wz;  // W dz
  double dtau = 0.0;
  double dkappa = 0.0;
};

double safe_norm(const Vector& v) { return v.size() ? v.norm() : 0.0; }

ConicSolution solve_core(const ConicProgram& program, const IpmSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  program.check();
  const int n = program.num_vars();
  const int p = program.num_eq();
  const auto& cones = program.cones;
  const Vector& c = program.c;
  const Vector& b = program.b;
  const Vector& h = program.h;
  const SparseMatrix& A = program.A;
  const SparseMatrix& G = program.G;
  const double degree = program.degree();

  ConicSolution out;
  auto finish = [&](ConicStatus status, std::string message) {
    out.status = status;
    out.message = std::move(message);
    out.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };

  NtScaling scaling(cones);
  ReducedKkt kkt(program, scaling, settings);
  const Vector e = identity_element(cones);

  // Starting point: least-squares primal and minimum-norm dual.
  Vector x;
  Vector y;
  Vector z;
  Vector s;
  if (!kkt.factor()) return finish(ConicStatus::kNumericalFailure, "initial factorisation failed");
  {
    Vector zt;
    kkt.solve(Vector::Zero(n), b, h, x, y, zt);
    s = -zt;
    Vector xd;
    kkt.solve(-c, Vector::Zero(p), Vector::Zero(h.size()), xd, y, z);
  }
  const double shift_s = boundary_shift(cones, s);
  if (shift_s >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + shift_s) * e;
  const double shift_z = boundary_shift(cones, z);
  if (shift_z >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + shift_z) * e;
  double tau = 1.0;
  double kappa = 1.0;

  const double bh_norm = std::max(1.0, std::sqrt(b.squaredNorm() + h.squaredNorm()));
  const double c_norm = std::max(1.0, c.norm());

  if (settings.verbose) {
    std::fprintf(stderr, "%4s %13s %13s %9s %9s %9s %9s %9s\n", "it", "pcost", "dcost", "gap",
                 "pres", "dres", "k/t", "step");
  }

  // Best iterate by max(pres, dres, gap measure), returned at reduced
  // accuracy when progress stalls or the iteration breaks down.
  struct Snapshot {
    double merit = std::numeric_limits<double>::infinity();
    Vector x, y, z, s;
    double tau = 1.0, pcost = 0.0, dcost = 0.0, gap = 0.0, pres = 0.0, dres = 0.0, relgap = 0.0;
    int iteration = 0;
  } best;
  // Best infeasibility certificates, normalised, for the same fallback.
  struct Certificate {
    double quality = std::numeric_limits<double>::infinity();
    Vector u, v;
  } primal_cert, dual_cert;
  auto give_up = [&](const std::string& why) {
    if (best.merit < std::numeric_limits<double>::infinity() &&
        best.pres < settings.reduced_feastol && best.dres < settings.reduced_feastol &&
        (best.gap < settings.reduced_gaptol || best.relgap < settings.reduced_gaptol)) {
      out.x = best.x / best.tau;
      out.y = best.y / best.tau;
      out.z = best.z / best.tau;
      out.s = best.s / best.tau;
      out.primal_objective = best.pcost;
      out.dual_objective = best.dcost;
      out.gap = best.gap;
      out.primal_residual = best.pres;
      out.dual_residual = best.dres;
      return finish(ConicStatus::kOptimal,
                    "reduced accuracy (" + why + ", best iterate " +
                        std::to_string(best.iteration) + ")");
    }
    if (primal_cert.quality < settings.reduced_feastol) {
      out.x = Vector::Zero(n);
      out.s = Vector::Zero(s.size());
      out.y = primal_cert.u;
      out.z = primal_cert.v;
      return finish(ConicStatus::kPrimalInfeasible,
                    "primal infeasibility certificate at reduced accuracy (" + why + ")");
    }
    if (dual_cert.quality < settings.reduced_feastol) {
      out.x = dual_cert.u;
      out.s = dual_cert.v;
      out.y = Vector::Zero(p);
      out.z = Vector::Zero(z.size());
      return finish(ConicStatus::kDualInfeasible,
                    "dual infeasibility certificate at reduced accuracy (" + why + ")");
    }
    out.x = x / tau;
    out.y = y / tau;
    out.z = z / tau;
    out.s = s / tau;
    return finish(why == "iteration limit reached" ? ConicStatus::kMaxIterations
                                                   : ConicStatus::kNumericalFailure,
                  why);
  };

  double last_step = 0.0;
  int stalled = 0;
  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    out.iterations = iter;
    const Vector aty = p > 0 ? Vector(A.transpose() * y) : Vector::Zero(n);
    const Vector gtz = G.transpose() * z;
    const Vector ax = p > 0 ? Vector(A * x) : Vector();
    const Vector gx = G * x;
    const Vector rx = aty + gtz + tau * c;
    const Vector ry = p > 0 ? Vector(ax - tau * b) : Vector();
    const Vector rz = gx + s - tau * h;
    const double cx = c.dot(x);
    const double by_hz = (p > 0 ? b.dot(y) : 0.0) + h.dot(z);
    const double rt = kappa + cx + by_hz;

    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double pres = std::sqrt(safe_norm(ry) * safe_norm(ry) + rz.squaredNorm()) / tau / bh_norm;
    const double dres = rx.norm() / tau / c_norm;
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0) relgap = gap / -pcost;
    if (dcost > 0.0) relgap = gap / dcost;
    if (std::abs(pcost) <= 1e-300 && std::abs(dcost) <= 1e-300) relgap = gap;

    out.primal_objective = pcost;
    out.dual_objective = dcost;
    out.gap = gap;
    out.primal_residual = pres;
    out.dual_residual = dres;

    if (settings.verbose) {
      std::fprintf(stderr, "%4d %+13.6e %+13.6e %9.2e %9.2e %9.2e %9.2e %9.2e\n", iter, pcost,
                   dcost, gap, pres, dres, kappa / tau, last_step);
    }
    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap)) {
      return give_up("non-finite iterate");
    }

    if (pres < settings.feastol && dres < settings.feastol &&
        (gap < settings.abstol || relgap < settings.reltol)) {
      out.x = x / tau;
      out.y = y / tau;
      out.z = z / tau;
      out.s = s / tau;
      return finish(ConicStatus::kOptimal, "converged");
    }
    if (by_hz < 0.0) {
      const double cert = (aty + gtz).norm() / -by_hz;
      if (cert < settings.feastol) {
        out.y = y / -by_hz;
        out.z = z / -by_hz;
        out.x = Vector::Zero(n);
        out.s = Vector::Zero(s.size());
        return finish(ConicStatus::kPrimalInfeasible, "primal infeasibility certificate");
      }
      if (cert < primal_cert.quality) primal_cert = {cert, y / -by_hz, z / -by_hz};
    }
    if (cx < 0.0) {
      const double cert = std::max(safe_norm(ax), (gx + s).norm()) / -cx;
      if (cert < settings.feastol) {
        out.x = x / -cx;
        out.s = s / -cx;
        out.y = Vector::Zero(p);
        out.z = Vector::Zero(z.size());
        return finish(ConicStatus::kDualInfeasible, "dual infeasibility certificate");
      }
      if (cert < dual_cert.quality) dual_cert = {cert, x / -cx, s / -cx};
    }

    const double merit = std::max({pres, dres, std::min(gap, relgap)});
    // Stalling only ends the run once the best iterate is already acceptable
    // at reduced accuracy; otherwise infeasibility certificates need time.
    const bool acceptable = std::max(best.pres, best.dres) < settings.reduced_feastol &&
                            std::min(best.gap, best.relgap) < settings.reduced_gaptol;
    if (merit < 0.5 * best.merit) {
      stalled = 0;
    } else if (acceptable && ++stalled >= settings.stall_iterations) {
      return give_up("no progress");
    }
    if (merit < best.merit) {
      best = {merit, x, y, z, s, tau, pcost, dcost, gap, pres, dres, relgap, iter};
    }
    if (iter == settings.max_iterations) break;

    if (!scaling.update(s, z)) return give_up("iterate left the cone interior");
    const Vector& lambda = scaling.lambda();
    const double mu = (s.dot(z) + tau * kappa) / (degree + 1.0);
    if (!kkt.factor()) return give_up("KKT factorisation failed");

    Vector x1;
    Vector y1;
    Vector z1;
    kkt.solve(-c, b, h, x1, y1, z1);
    const double denom_base = c.dot(x1) + (p > 0 ? b.dot(y1) : 0.0) + h.dot(z1);

    auto direction = [&](const Vector& dsv, double dk, double eta) {
      Direction d;
      const Vector ldiv = jordan_divide(cones, lambda, dsv);
      const Vector r3 = -eta * rz + scaling.apply_wt(ldiv);
      Vector x2;
      Vector y2;
      Vector z2;
      kkt.solve(-eta * rx, p > 0 ? Vector(-eta * ry) : Vector(), r3, x2, y2, z2);
      const double num = -eta * rt + dk / tau -
                         (c.dot(x2) + (p > 0 ? b.dot(y2) : 0.0) + h.dot(z2));
      d.dtau = num / (denom_base - kappa / tau);
      d.dx = x2 + d.dtau * x1;
      d.dy = p > 0 ? Vector(y2 + d.dtau * y1) : Vector();
      d.dz = z2 + d.dtau * z1;
      d.wz = scaling.apply_w(d.dz);
      // Slack step from the linearised primal equation, so residual errors of
      // the KKT solve land in centrality rather than in primal feasibility.
      d.ds = -eta * rz - G * d.dx + d.dtau * h;
      d.ws = scaling.apply_winvt(d.ds);
      d.dkappa = -(dk + kappa * d.dtau) / tau;
      return d;
    };
    auto step_to_boundary = [&](const Direction& d) {
      double alpha = max_step(cones, lambda, d.ws, 1e300);
      alpha = max_step(cones, lambda, d.wz, alpha);
      if (d.dtau < 0.0) alpha = std::min(alpha, -tau / d.dtau);
      if (d.dkappa < 0.0) alpha = std::min(alpha, -kappa / d.dkappa);
      return alpha;
    };

    // Predictor.
    const Vector lsq = jordan_product(cones, lambda, lambda);
    const Direction aff = direction(lsq, tau * kappa, 1.0);
    const double alpha_aff = std::min(1.0, step_to_boundary(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

    // Combined step with second-order correction.
    const Vector dsc =
        lsq + jordan_product(cones, aff.ws, aff.wz) - sigma * mu * e;
    const double dkc = tau * kappa + aff.dtau * aff.dkappa - sigma * mu;
    const Direction d = direction(dsc, dkc, 1.0 - sigma);
    const double alpha = std::min(1.0, 0.99 * step_to_boundary(d));
    if (!(alpha > 1e-10) || !std::isfinite(alpha)) return give_up("step length collapsed");
    last_step = alpha;

    x += alpha * d.dx;
    if (p > 0) y += alpha * d.dy;
    z += alpha * d.dz;
    s += alpha * d.ds;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
  }

  return give_up("iteration limit reached");
}

// Columns of [c'; A; G] that coincide exactly are merged into one variable:
// the reduced program has the same optimal value and any split of the merged
// value is optimal for the original. Without this the reduced KKT matrix is
// exactly singular along x_i - x_j.
struct ColumnMerge {
  std::vector<int> representative;  // original column -> reduced column
  std::vector<int> multiplicity;    // per reduced column
  std::vector<int> kept;            // reduced column -> first original column
};

ColumnMerge find_duplicate_columns(const ConicProgram& program) {
  const int n = program.num_vars();
  using Key = std::vector<std::pair<int, double>>;
  auto key_of = [&](int j) {
    Key key;
    key.emplace_back(-1, program.c(j));
    for (SparseMatrix::InnerIterator it(program.A, j); it; ++it) {
      if (it.value() != 0.0) key.emplace_back(it.row(), it.value());
    }
    const int p = program.num_eq();
    for (SparseMatrix::InnerIterator it(program.G, j); it; ++it) {
      if (it.value() != 0.0) key.emplace_back(p + it.row(), it.value());
    }
    return key;
  };
  std::map<Key, int> seen;
  ColumnMerge merge;
  merge.representative.resize(n);
  for (int j = 0; j < n; ++j) {
    Key key = key_of(j);
    // Empty columns are left alone so unbounded directions stay visible.
    const bool mergeable = key.size() > 1;
    auto found = mergeable ? seen.find(key) : seen.end();
    if (found != seen.end()) {
      merge.representative[j] = found->second;
      ++merge.multiplicity[found->second];
      continue;
    }
    const int idx = static_cast<int>(merge.kept.size());
    if (mergeable) seen.emplace(std::move(key), idx);
    merge.representative[j] = idx;
    merge.kept.push_back(j);
    merge.multiplicity.push_back(1);
  }
  return merge;
}

SparseMatrix select_columns(const SparseMatrix& m, const std::vector<int>& cols) {
  SparseMatrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (SparseMatrix::InnerIterator it(m, cols[k]); it; ++it) {
      triplets.emplace_back(it.row(), static_cast<int>(k), it.value());
    }
  }
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

}  // namespace

ConicSolution solve_ipm(const ConicProgram& program, const IpmSettings& settings) {
  program.check();
  const ColumnMerge merge = find_duplicate_columns(program);
  if (merge.kept.size() == static_cast<std::size_t>(program.num_vars())) {
    return solve_core(program, settings);
  }
  ConicProgram reduced;
  reduced.cones = program.cones;
  reduced.b = program.b;
  reduced.h = program.h;
  reduced.c.resize(static_cast<Eigen::Index>(merge.kept.size()));
  for (std::size_t k = 0; k < merge.kept.size(); ++k) reduced.c(k) = program.c(merge.kept[k]);
  reduced.A = select_columns(program.A, merge.kept);
  reduced.G = select_columns(program.G, merge.kept);
  ConicSolution sol = solve_core(reduced, settings);
  if (sol.x.size() == reduced.num_vars()) {
    Vector x(program.num_vars());
    for (int j = 0; j < program.num_vars(); ++j) {
      const int r = merge.representative[j];
      x(j) = sol.x(r) / merge.multiplicity[r];
    }
    sol.x = std::move(x);
  }
  return sol;
}

}  // namespace covsteer::conic
