#include "cones.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <numbers>

namespace covsteer::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (x0 - |x1|)(x0 + |x1|), the Lorentz "determinant".
double soc_residual(const Eigen::Ref<const Vector>& x) {
  const double t = x.tail(x.size() - 1).norm();
  return (x(0) - t) * (x(0) + t);
}

double soc_max_step(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& d) {
  const auto x1 = x.tail(x.size() - 1);
  const auto d1 = d.tail(d.size() - 1);
  const double a = d(0) * d(0) - d1.squaredNorm();
  const double b = 2.0 * (x(0) * d(0) - x1.dot(d1));
  const double c = std::max(soc_residual(x), 0.0);
  double alpha = kInf;
  auto consider = [&](double r) {
    if (r > 0.0 && r < alpha) alpha = r;
  };
  if (std::abs(a) < 1e-300) {
    if (b < 0.0) consider(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0) {
        consider(q / a);
        consider(c / q);
      } else {
        consider(std::sqrt(std::max(-c / a, 0.0)));
      }
    }
  }
  // Leaving through the apex region is covered by the roots above, except
  // when x0 + alpha d0 turns negative without f changing sign (rounding).
  if (d(0) < 0.0) consider(-x(0) / d(0));
  return alpha;
}

double psd_max_step(const Matrix& x, const Matrix& d) {
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Matrix m = llt.matrixL().solve(d);
  m = llt.matrixL().solve(m.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric_part(m), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

// Solves (U X + X U) / 2 = V for symmetric positive definite U.
Matrix lyapunov_divide(const Matrix& u, const Matrix& v) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(u);
  const Matrix& q = eig.eigenvectors();
  const Vector& l = eig.eigenvalues();
  Matrix vt = q.transpose() * v * q;
  for (Eigen::Index j = 0; j < vt.cols(); ++j) {
    for (Eigen::Index i = 0; i < vt.rows(); ++i) vt(i, j) *= 2.0 / (l(i) + l(j));
  }
  return q * vt * q.transpose();
}

}  // namespace

std::vector<int> cone_offsets(const std::vector<Cone>& cones) {
  std::vector<int> offsets;
  offsets.reserve(cones.size() + 1);
  int off = 0;
  for (const auto& k : cones) {
    offsets.push_back(off);
    off += k.dim();
  }
  offsets.push_back(off);
  return offsets;
}

Vector identity_element(const std::vector<Cone>& cones) {
  const auto off = cone_offsets(cones);
  Vector e = Vector::Zero(off.back());
  for (std::size_t k = 0; k < cones.size(); ++k) {
    const auto& cone = cones[k];
    switch (cone.kind) {
      case ConeKind::kNonnegative:
        e.segment(off[k], cone.dim()).setOnes();
        break;
      case ConeKind::kSecondOrder:
        e(off[k]) = 1.0;
        break;
      case ConeKind::kPsd:
        e.segment(off[k], cone.dim()) = svec(Matrix::Identity(cone.size, cone.size));
        break;
    }
  }
  return e;
}

Vector jordan_product(const std::vector<Cone>& cones, const Vector& u, const Vector& v) {
  const auto off = cone_offsets(cones);
  Vector out(u.size());
  for (std::size_t k = 0; k < cones.size(); ++k) {
    const auto& cone = cones[k];
    const int m = cone.dim();
    const auto uk = u.segment(off[k], m);
    const auto vk = v.segment(off[k], m);
    auto ok = out.segment(off[k], m);
    switch (cone.kind) {
      case ConeKind::kNonnegative:
        ok = uk.cwiseProduct(vk);
        break;
      case ConeKind::kSecondOrder:
        ok(0) = uk.dot(vk);
        ok.tail(m - 1) = uk(0) * vk.tail(m - 1) + vk(0) * uk.tail(m - 1);
        break;
      case ConeKind::kPsd: {
        const Matrix um = smat(uk, cone.size);
        const Matrix vm = smat(vk, cone.size);
        ok = svec(0.5 * (um * vm + vm * um));
        break;
      }
    }
  }
  return out;
}

Vector jordan_divide(const std::vector<Cone>& cones, const Vector& u, const Vector& v) {
  const auto off = cone_offsets(cones);
  Vector out(u.size());
  for (std::size_t k = 0; k < cones.size(); ++k) {
    const auto& cone = cones[k];
    const int m = cone.dim();
    const auto uk = u.segment(off[k], m);
    const auto vk = v.segment(off[k], m);
    auto ok = out.segment(off[k], m);
    switch (cone.kind) {
      case ConeKind::kNonnegative:
        ok = vk.cwiseQuotient(uk);
        break;
      case ConeKind::kSecondOrder: {
        const auto u1 = uk.tail(m - 1);
        const auto v1 = vk.tail(m - 1);
        const double x0 = (uk(0) * vk(0) - u1.dot(v1)) / soc_residual(uk);
        ok(0) = x0;
        ok.tail(m - 1) = (v1 - x0 * u1) / uk(0);
        break;
      }
      case ConeKind::kPsd: {
        const Matrix um = smat(uk, cone.size);
        // Diagonal u (the scaled point) is the common case.
        const Matrix off_diag = um - Matrix(um.diagonal().asDiagonal());
        if (off_diag.cwiseAbs().maxCoeff() == 0.0) {
          Matrix x = smat(vk, cone.size);
          for (int j = 0; j < cone.size; ++j) {
            for (int i = 0; i < cone.size; ++i) x(i, j) *= 2.0 / (um(i, i) + um(j, j));
          }
          ok = svec(x);
        } else {
          ok = svec(lyapunov_divide(um, smat(vk, cone.size)));
        }
        break;
      }
    }
  }
  return out;
}

double max_step(const std::vector<Cone>& cones, const Vector& x, const Vector& d, double cap) {
  const auto off = cone_offsets(cones);
  double alpha = cap;
  for (std::size_t k = 0; k < cones.size(); ++k) {
    const auto& cone = cones[k];
    const int m = cone.dim();
    const auto xk = x.segment(off[k], m);
    const auto dk = d.segment(off[k], m);
    switch (cone.kind) {
      case ConeKind::kNonnegative:
        for (int i = 0; i < m; ++i) {
          if (dk(i) < 0.0) alpha = std::min(alpha, -xk(i) / dk(i));
        }
        break;
      case ConeKind::kSecondOrder:
        alpha = std::min(alpha, soc_max_step(xk, dk));
        break;
      case ConeKind::kPsd:
        alpha = std::min(alpha, psd_max_step(smat(xk, cone.size), smat(dk, cone.size)));
        break;
    }
  }
  return alpha;
}

double boundary_shift(const std::vector<Cone>& cones, const Vector& x) {
  const auto off = cone_offsets(cones);
  double t = -kInf;
  for (std::size_t k = 0; k < cones.size(); ++k) {
    const auto& cone = cones[k];
    const int m = cone.dim();
    const auto xk = x.segment(off[k], m);
    switch (cone.kind) {
      case ConeKind::kNonnegative:
        t = std::max(t, -xk.minCoeff());
        break;
      case ConeKind::kSecondOrder:
        t = std::max(t, xk.tail(m - 1).norm() - xk(0));
        break;
      case ConeKind::kPsd: {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(smat(xk, cone.size), Eigen::EigenvaluesOnly);
        t = std::max(t, -eig.eigenvalues().minCoeff());
        break;
      }
    }
  }
  return t;
}

NtScaling::NtScaling(std::vector<Cone> cones)
    : cones_(std::move(cones)),
      offsets_(cone_offsets(cones_)),
      w_(cones_.size()),
      eta_(cones_.size(), 1.0),
      r_(cones_.size()),
      rinv_(cones_.size()) {
  set_identity();
}

void NtScaling::set_identity() {
  for (std::size_t k = 0; k < cones_.size(); ++k) {
    const auto& cone = cones_[k];
    eta_[k] = 1.0;
    switch (cone.kind) {
      case ConeKind::kNonnegative:
        w_[k] = Vector::Ones(cone.dim());
        break;
      case ConeKind::kSecondOrder:
        w_[k] = Vector::Zero(cone.dim());
        w_[k](0) = 1.0;
        break;
      case ConeKind::kPsd:
        r_[k] = Matrix::Identity(cone.size, cone.size);
        rinv_[k] = r_[k];
        break;
    }
  }
  lambda_ = identity_element(cones_);
}

bool NtScaling::update(const Vector& s, const Vector& z) {
  lambda_.resize(s.size());
  for (std::size_t k = 0; k < cones_.size(); ++k) {
    const auto& cone = cones_[k];
    const int m = cone.dim();
    const auto sk = s.segment(offsets_[k], m);
    const auto zk = z.segment(offsets_[k], m);
    auto lk = lambda_.segment(offsets_[k], m);
    switch (cone.kind) {
      case ConeKind::kNonnegative: {
        if (sk.minCoeff() <= 0.0 || zk.minCoeff() <= 0.0) return false;
        w_[k] = sk.cwiseQuotient(zk).cwiseSqrt();
        lk = sk.cwiseProduct(zk).cwiseSqrt();
        break;
      }
      case ConeKind::kSecondOrder: {
        const double sres = soc_residual(sk);
        const double zres = soc_residual(zk);
        if (!(sres > 0.0 && zres > 0.0 && sk(0) > 0.0 && zk(0) > 0.0)) return false;
        const Vector sb = sk / std::sqrt(sres);
        const Vector zb = zk / std::sqrt(zres);
        const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
        Vector& w = w_[k];
        w.resize(m);
        w(0) = (sb(0) + zb(0)) / (2.0 * gamma);
        w.tail(m - 1) = (sb.tail(m - 1) - zb.tail(m - 1)) / (2.0 * gamma);
        eta_[k] = std::pow(sres / zres, 0.25);
        // Keep w on the unit hyperboloid despite rounding.
        w(0) = std::sqrt(1.0 + w.tail(m - 1).squaredNorm());
        break;
      }
      case ConeKind::kPsd: {
        const Matrix sm = smat(sk, cone.size);
        const Matrix zm = smat(zk, cone.size);
        Eigen::LLT<Matrix> l1(sm);
        Eigen::LLT<Matrix> l2(zm);
        if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) return false;
        const Matrix L1 = l1.matrixL();
        const Matrix L2 = l2.matrixL();
        Eigen::JacobiSVD<Matrix> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vector& sig = svd.singularValues();
        if (!(sig.minCoeff() > 0.0)) return false;
        const Vector isq = sig.cwiseSqrt().cwiseInverse();
        r_[k] = L1 * svd.matrixV() * isq.asDiagonal();
        rinv_[k] = isq.asDiagonal() * svd.matrixU().transpose() * L2.transpose();
        break;
      }
    }
  }
  // lambda = W z, computed once all blocks are set.
  const Vector wz = apply_w(z);
  for (std::size_t k = 0; k < cones_.size(); ++k) {
    if (cones_[k].kind == ConeKind::kNonnegative) continue;
    const int m = cones_[k].dim();
    if (cones_[k].kind == ConeKind::kPsd) {
      // Exactly diagonal by construction; drop rounding noise off the diagonal.
      const Matrix l = smat(wz.segment(offsets_[k], m), cones_[k].size);
      lambda_.segment(offsets_[k], m) = svec(Matrix(l.diagonal().asDiagonal()));
    } else {
      lambda_.segment(offsets_[k], m) = wz.segment(offsets_[k], m);
    }
  }
  return true;
}

Vector NtScaling::apply_w(const Vector& v) const {
  Vector out(v.size());
  for (std::size_t k = 0; k < cones_.size(); ++k) {
    const auto& cone = cones_[k];
    const int m = cone.dim();
    const auto vk = v.segment(offsets_[k], m);
    auto ok = out.segment(offsets_[k], m);
    switch (cone.kind) {
      case ConeKind::kNonnegative:
        ok = w_[k].cwiseProduct(vk);
        break;
      case ConeKind::kSecondOrder: {
        const Vector& w = w_[k];
        const double w1v1 = w.tail(m - 1).dot(vk.tail(m - 1));
        ok(0) = eta_[k] * (w(0) * vk(0) + w1v1);
        ok.tail(m - 1) =
            eta_[k] * (vk.tail(m - 1) + (w1v1 / (1.0 + w(0)) + vk(0)) * w.tail(m - 1));
        break;
      }
      case ConeKind::kPsd:
        ok = svec(r_[k].transpose() * smat(vk, cone.size) * r_[k]);
        break;
    }
  }
  return out;
}

Vector NtScaling::apply_wt(const Vector& v) const {
  Vector out = apply_w(v);
  for (std::size_t k = 0; k < cones_.size(); ++k) {
    if (cones_[k].kind != ConeKind::kPsd) continue;
    const int m = cones_[k].dim();
    out.segment(offsets_[k], m) =
        svec(r_[k] * smat(v.segment(offsets_[k], m), cones_[k].size) * r_[k].transpose());
  }
  return out;
}

Vector NtScaling::apply_winv(const Vector& v) const {
  Vector out(v.size());
  for (std::size_t k = 0; k < cones_.size(); ++k) {
    const auto& cone = cones_[k];
    const int m = cone.dim();
    const auto vk = v.segment(offsets_[k], m);
    auto ok = out.segment(offsets_[k], m);
    switch (cone.kind) {
      case ConeKind::kNonnegative:
        ok = vk.cwiseQuotient(w_[k]);
        break;
      case ConeKind::kSecondOrder: {
        const Vector& w = w_[k];
        const double w1v1 = w.tail(m - 1).dot(vk.tail(m - 1));
        ok(0) = (w(0) * vk(0) - w1v1) / eta_[k];
        ok.tail(m - 1) =
            (vk.tail(m - 1) + (w1v1 / (1.0 + w(0)) - vk(0)) * w.tail(m - 1)) / eta_[k];
        break;
      }
      case ConeKind::kPsd:
        ok = svec(rinv_[k].transpose() * smat(vk, cone.size) * rinv_[k]);
        break;
    }
  }
  return out;
}

Vector NtScaling::apply_winvt(const Vector& v) const {
  Vector out = apply_winv(v);
  for (std::size_t k = 0; k < cones_.size(); ++k) {
    if (cones_[k].kind != ConeKind::kPsd) continue;
    const int m = cones_[k].dim();
    out.segment(offsets_[k], m) =
        svec(rinv_[k] * smat(v.segment(offsets_[k], m), cones_[k].size) * rinv_[k].transpose());
  }
  return out;
}

Matrix NtScaling::inverse_gram_block(int k, const std::vector<int>& rows) const {
  const auto& cone = cones_[k];
  const int r = static_cast<int>(rows.size());
  Matrix out = Matrix::Zero(r, r);
  switch (cone.kind) {
    case ConeKind::kNonnegative:
      for (int i = 0; i < r; ++i) out(i, i) = 1.0 / (w_[k](rows[i]) * w_[k](rows[i]));
      break;
    case ConeKind::kSecondOrder: {
      const Vector jw = soc_jw(k);
      const double e2 = eta_[k] * eta_[k];
      for (int b = 0; b < r; ++b) {
        for (int a = 0; a < r; ++a) {
          out(a, b) = 2.0 * jw(rows[a]) * jw(rows[b]);
        }
        out(b, b) -= rows[b] == 0 ? 1.0 : -1.0;
      }
      out /= e2;
      break;
    }
    case ConeKind::kPsd: {
      const int p = cone.size;
      // Local svec index -> (i, j), i >= j.
      std::vector<int> ii(static_cast<std::size_t>(cone.dim()));
      std::vector<int> jj(ii.size());
      for (int j = 0, idx = 0; j < p; ++j) {
        for (int i = j; i < p; ++i, ++idx) {
          ii[idx] = i;
          jj[idx] = j;
        }
      }
      const Matrix t = rinv_[k].transpose() * rinv_[k];
      constexpr double s2 = std::numbers::sqrt2;
      for (int b = 0; b < r; ++b) {
        const int kk = ii[rows[b]];
        const int ll = jj[rows[b]];
        for (int a = 0; a < r; ++a) {
          const int i = ii[rows[a]];
          const int j = jj[rows[a]];
          double v;
          if (i == j && kk == ll) {
            v = t(i, kk) * t(i, kk);
          } else if (i == j) {
            v = s2 * t(i, kk) * t(i, ll);
          } else if (kk == ll) {
            v = s2 * t(i, kk) * t(j, kk);
          } else {
            v = t(i, kk) * t(j, ll) + t(i, ll) * t(j, kk);
          }
          out(a, b) = v;
        }
      }
      break;
    }
  }
  return out;
}

Vector NtScaling::soc_jw(int k) const {
  Vector jw = w_[k];
  jw.tail(jw.size() - 1) *= -1.0;
  return jw;
}

}  // namespace covsteer::conic
