#include "lifting.hpp"

namespace covsteer {

TransitionProducts transition_products(const ProblemSpec& spec) {
  const int n = spec.horizon;
  const int nx = spec.nx();
  const int nu = spec.nu();
  const int nw = spec.nw();

  TransitionProducts out;
  out.Abar.reserve(n + 1);
  out.Bbar.reserve(n + 1);
  out.Dbar.reserve(n + 1);
  out.Abar.push_back(Matrix::Identity(nx, nx));
  out.Bbar.emplace_back(nx, 0);
  out.Dbar.emplace_back(nx, 0);
  for (int k = 0; k < n; ++k) {
    const auto& sys = spec.systems[k];
    // x_{k+1} = A_k x_k + B_k u_k + D_k w_k applied to the previous maps.
    out.Abar.push_back(sys.A * out.Abar[k]);
    Matrix b(nx, (k + 1) * nu);
    b.leftCols(k * nu) = sys.A * out.Bbar[k];
    b.rightCols(nu) = sys.B;
    out.Bbar.push_back(std::move(b));
    Matrix d(nx, (k + 1) * nw);
    d.leftCols(k * nw) = sys.A * out.Dbar[k];
    d.rightCols(nw) = sys.D;
    out.Dbar.push_back(std::move(d));
  }
  return out;
}

Matrix LiftedSystem::open_loop_covariance() const {
  return symmetric_part(boldA * Sigma0_aug * boldA.transpose() + boldD * boldD.transpose());
}

Matrix LiftedSystem::second_moment() const {
  const Matrix moment0 = mu0_aug * mu0_aug.transpose() + Sigma0_aug;
  return symmetric_part(boldA * moment0 * boldA.transpose() + boldD * boldD.transpose());
}

LiftedSystem build_lifted(const ProblemSpec& spec) {
  require_valid(spec);
  const int n = spec.horizon;
  const int nx = spec.nx();
  const int nu = spec.nu();
  const int nw = spec.nw();

  LiftedSystem out;
  out.horizon = n;
  out.nx = nx;
  out.nu = nu;
  out.nw = nw;

  const TransitionProducts tp = transition_products(spec);
  const int rows = (n + 1) * nx;
  out.calA.resize(rows, nx);
  out.calB = Matrix::Zero(rows, n * nu);
  out.calD = Matrix::Zero(rows, n * nw);
  for (int k = 0; k <= n; ++k) {
    out.calA.middleRows(k * nx, nx) = tp.Abar[k];
    out.calB.block(k * nx, 0, nx, k * nu) = tp.Bbar[k];
    out.calD.block(k * nx, 0, nx, k * nw) = tp.Dbar[k];
  }

  out.Qbar = Matrix::Zero(rows, rows);
  out.Rbar = Matrix::Zero(n * nu, n * nu);
  for (int k = 0; k < n; ++k) {
    out.Qbar.block(k * nx, k * nx, nx, nx) = symmetric_part(spec.costs[k].Q);
    out.Rbar.block(k * nu, k * nu, nu, nu) = symmetric_part(spec.costs[k].R);
  }

  out.E0 = Matrix::Zero(nx, rows);
  out.E0.leftCols(nx).setIdentity();
  out.EN = Matrix::Zero(nx, rows);
  out.EN.rightCols(nx).setIdentity();

  const Matrix eye = Matrix::Identity(nx, nx);
  const Matrix zero_x = Matrix::Zero(nx, nx);
  out.boldA = block_diagonal({&eye, &out.calA});
  out.boldB = Matrix::Zero(rows + nx, n * nu);
  out.boldB.bottomRows(rows) = out.calB;
  out.boldD = Matrix::Zero(rows + nx, n * nw);
  out.boldD.bottomRows(rows) = out.calD;
  out.boldQ = block_diagonal({&zero_x, &out.Qbar});
  out.boldEN = Matrix::Zero(nx, rows + nx);
  out.boldEN.rightCols(nx).setIdentity();

  out.mu0_aug.resize(2 * nx);
  out.mu0_aug << Vector::Ones(nx), spec.initial.mean;
  const Matrix sigma0 = symmetric_part(spec.initial.cov);
  out.Sigma0_aug = block_diagonal({&zero_x, &sigma0});

  out.S_half = psd_sqrt(out.open_loop_covariance());
  return out;
}

std::vector<LiftedHalfspace> lift_halfspaces(const ProblemSpec& spec,
                                             const LiftedSystem& lifted) {
  const int nx = lifted.nx;
  const int dim = lifted.stacked_dim();
  const std::vector<double> risks = resolve_row_risks(spec);

  std::vector<LiftedHalfspace> rows;
  rows.reserve(risks.size());
  std::size_t r = 0;
  for (std::size_t j = 0; j < spec.halfspaces.size(); ++j) {
    const auto& h = spec.halfspaces[j];
    for (int k : h.steps) {
      LiftedHalfspace row;
      row.alpha = Vector::Zero(dim);
      // bold X = [1; x_0; ...; x_N]: x_k occupies block k + 1.
      row.alpha.segment((k + 1) * nx, nx) = h.a;
      row.beta = h.b;
      row.p_fail = risks[r++];
      row.constraint = static_cast<int>(j);
      row.step = k;
      rows.push_back(std::move(row));
    }
  }
  for (std::size_t j = 0; j < spec.stacked.size(); ++j) {
    const auto& s = spec.stacked[j];
    LiftedHalfspace row;
    row.alpha = Vector::Zero(dim);
    row.alpha.tail(dim - nx) = s.alpha;
    row.beta = s.beta;
    row.p_fail = risks[r++];
    row.constraint = static_cast<int>(spec.halfspaces.size() + j);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace covsteer
