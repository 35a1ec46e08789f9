#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "conic/backend.hpp"
#include "conic/cones.hpp"
#include "conic/ipm.hpp"
#include "conic/program.hpp"
#include "error.hpp"

using namespace covsteer;
using namespace covsteer::conic;

namespace {

SparseMatrix sparse(const Matrix& m) { return m.sparseView(); }

Matrix random_spd(int p, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix x(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = n01(rng);
  return x * x.transpose() + 0.5 * Matrix::Identity(p, p);
}

Vector random_soc_interior(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = n01(rng);
  v(0) = v.tail(n - 1).norm() + 0.1 + std::abs(n01(rng));
  return v;
}

}  // namespace

TEST(Svec, InnerProductMatchesTrace) {
  std::mt19937_64 rng(3);
  const Matrix a = random_spd(4, rng);
  const Matrix b = random_spd(4, rng);
  EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace(), 1e-10);
  EXPECT_LT((smat(svec(a), 4) - a).norm(), 1e-12);
  EXPECT_EQ(svec_index(2, 1, 4), 5);
}

TEST(NtScaling, SecondOrderIdentities) {
  std::mt19937_64 rng(11);
  std::vector<Cone> cones{{ConeKind::kSecondOrder, 5}, {ConeKind::kNonnegative, 3}};
  Vector s(8);
  Vector z(8);
  s << random_soc_interior(5, rng), 0.3, 2.0, 1.1;
  z << random_soc_interior(5, rng), 1.7, 0.2, 0.9;
  NtScaling w(cones);
  ASSERT_TRUE(w.update(s, z));
  EXPECT_LT((w.apply_w(z) - w.lambda()).norm(), 1e-10);
  EXPECT_LT((w.apply_winvt(s) - w.lambda()).norm(), 1e-10);
  const Vector v = Vector::LinSpaced(8, -1.0, 2.0);
  EXPECT_LT((w.apply_winv(w.apply_w(v)) - v).norm(), 1e-10);
  EXPECT_LT((w.apply_winvt(w.apply_wt(v)) - v).norm(), 1e-10);

  // wbar is a unit hyperbolic vector: Wbar^2 = 2 wbar wbar' - J.
  Matrix wmat(5, 5);
  for (int j = 0; j < 5; ++j) wmat.col(j) = w.apply_w(Vector::Unit(8, j)).head(5);
  const double eta = w.soc_eta(0);
  Vector wbar = w.soc_jw(0);
  wbar.tail(4) *= -1.0;
  Matrix j = Matrix::Identity(5, 5);
  j.bottomRightCorner(4, 4) *= -1.0;
  const Matrix wbar_mat = wmat / eta;
  EXPECT_LT((wbar_mat * wbar_mat - (2.0 * wbar * wbar.transpose() - j)).norm(), 1e-9);

  // Gram block agrees with explicit W^{-1} W^{-T}.
  const Matrix gram = w.inverse_gram_block(0, {0, 1, 2, 3, 4});
  Matrix explicit_gram(5, 5);
  for (int c = 0; c < 5; ++c)
    explicit_gram.col(c) = w.apply_winv(w.apply_winvt(Vector::Unit(8, c))).head(5);
  EXPECT_LT((gram - explicit_gram).norm(), 1e-9);
}

TEST(NtScaling, PsdIdentities) {
  std::mt19937_64 rng(5);
  std::vector<Cone> cones{{ConeKind::kPsd, 3}};
  const Vector s = svec(random_spd(3, rng));
  const Vector z = svec(random_spd(3, rng));
  NtScaling w(cones);
  ASSERT_TRUE(w.update(s, z));
  EXPECT_LT((w.apply_w(z) - w.lambda()).norm(), 1e-9);
  EXPECT_LT((w.apply_winvt(s) - w.lambda()).norm(), 1e-9);
  // lambda is diagonal.
  const Matrix l = smat(w.lambda(), 3);
  EXPECT_LT((l - Matrix(l.diagonal().asDiagonal())).norm(), 1e-12);
  const Matrix gram = w.inverse_gram_block(0, {0, 1, 2, 3, 4, 5});
  Matrix explicit_gram(6, 6);
  for (int c = 0; c < 6; ++c) explicit_gram.col(c) = w.apply_winv(w.apply_winvt(Vector::Unit(6, c)));
  EXPECT_LT((gram - explicit_gram).norm(), 1e-9);
}

TEST(Cones, JordanDivideInvertsProduct) {
  std::mt19937_64 rng(8);
  std::vector<Cone> cones{{ConeKind::kNonnegative, 2}, {ConeKind::kSecondOrder, 4}, {ConeKind::kPsd, 3}};
  Vector u(12);
  u << 0.5, 2.0, random_soc_interior(4, rng), svec(random_spd(3, rng));
  Vector x = Vector::LinSpaced(12, -2.0, 3.0);
  const Vector v = jordan_product(cones, u, x);
  EXPECT_LT((jordan_divide(cones, u, v) - x).norm(), 1e-9);
}

TEST(Cones, MaxStepHitsBoundary) {
  std::vector<Cone> cones{{ConeKind::kSecondOrder, 3}};
  Vector x(3);
  x << 2.0, 0.0, 0.0;
  Vector d(3);
  d << 0.0, 1.0, 0.0;
  EXPECT_NEAR(max_step(cones, x, d, 1e9), 2.0, 1e-12);
  std::vector<Cone> psd{{ConeKind::kPsd, 2}};
  const Vector xs = svec(Matrix::Identity(2, 2));
  Matrix dm(2, 2);
  dm << -0.5, 0.0, 0.0, -0.25;
  EXPECT_NEAR(max_step(psd, xs, svec(dm), 1e9), 2.0, 1e-10);
}

TEST(Ipm, LinearProgram) {
  ConicProgram p;
  p.c = Vector(2);
  p.c << -1.0, -1.0;
  Matrix g(4, 2);
  g << 1, 2, 3, 1, -1, 0, 0, -1;
  p.G = sparse(g);
  p.h = Vector(4);
  p.h << 4, 6, 0, 0;
  p.A = SparseMatrix(0, 2);
  p.b = Vector(0);
  p.cones = {{ConeKind::kNonnegative, 4}};
  const auto sol = solve_ipm(p);
  ASSERT_EQ(sol.status, ConicStatus::kOptimal);
  EXPECT_NEAR(sol.x(0), 1.6, 1e-7);
  EXPECT_NEAR(sol.x(1), 1.2, 1e-7);
  EXPECT_NEAR(sol.primal_objective, -2.8, 1e-7);
}

TEST(Ipm, SecondOrderProjection) {
  // min t  s.t. ||x - (3,4)|| <= t, x1 + x2 = 1.
  ConicProgram p;
  p.c = Vector::Unit(3, 0);
  Matrix a(1, 3);
  a << 0, 1, 1;
  p.A = sparse(a);
  p.b = Vector::Constant(1, 1.0);
  Matrix g = -Matrix::Identity(3, 3);
  p.G = sparse(g);
  p.h = Vector(3);
  p.h << 0, -3, -4;
  p.cones = {{ConeKind::kSecondOrder, 3}};
  const auto sol = solve_ipm(p);
  ASSERT_EQ(sol.status, ConicStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, 6.0 / std::sqrt(2.0), 1e-7);
  EXPECT_NEAR(sol.x(1), 0.0, 1e-6);
  EXPECT_NEAR(sol.x(2), 1.0, 1e-6);
}

TEST(Ipm, SemidefiniteMinEigenvalue) {
  Matrix c(2, 2);
  c << 2, 1, 1, 3;
  ConicProgram p;
  p.c = svec(c);
  p.A = sparse(svec(Matrix::Identity(2, 2)).transpose());
  p.b = Vector::Constant(1, 1.0);
  p.G = sparse(-Matrix::Identity(3, 3));
  p.h = Vector::Zero(3);
  p.cones = {{ConeKind::kPsd, 2}};
  const auto sol = solve_ipm(p);
  ASSERT_EQ(sol.status, ConicStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, (5.0 - std::sqrt(5.0)) / 2.0, 1e-7);
}

TEST(Ipm, DetectsPrimalInfeasibility) {
  // x >= 1 and x <= 0.
  ConicProgram p;
  p.c = Vector::Constant(1, 1.0);
  Matrix g(2, 1);
  g << -1, 1;
  p.G = sparse(g);
  p.h = Vector(2);
  p.h << -1, 0;
  p.A = SparseMatrix(0, 1);
  p.b = Vector(0);
  p.cones = {{ConeKind::kNonnegative, 2}};
  EXPECT_EQ(solve_ipm(p).status, ConicStatus::kPrimalInfeasible);
}

TEST(Ipm, DetectsUnboundedness) {
  ConicProgram p;
  p.c = Vector::Constant(1, -1.0);
  p.G = sparse(-Matrix::Identity(1, 1));
  p.h = Vector::Zero(1);
  p.A = SparseMatrix(0, 1);
  p.b = Vector(0);
  p.cones = {{ConeKind::kNonnegative, 1}};
  EXPECT_EQ(solve_ipm(p).status, ConicStatus::kDualInfeasible);
}

TEST(Ipm, RandomMixedConeKktConditions) {
  // Feasible by construction: h - G x0 interior, c = -A'y0 - G'z0 with z0 interior.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  std::vector<Cone> cones{{ConeKind::kNonnegative, 4}, {ConeKind::kSecondOrder, 5}, {ConeKind::kPsd, 3}};
  const int m = 4 + 5 + 6;
  const int n = 7;
  Matrix g(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = n01(rng);
  Matrix a(2, n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = n01(rng);
  Vector x0(n);
  for (int j = 0; j < n; ++j) x0(j) = n01(rng);
  Vector s0(m);
  s0 << 1.0, 0.5, 2.0, 0.7, random_soc_interior(5, rng), svec(random_spd(3, rng));
  Vector z0(m);
  z0 << 0.3, 1.0, 0.4, 1.5, random_soc_interior(5, rng), svec(random_spd(3, rng));
  const Vector y0 = Vector::Constant(2, 0.5);
  ConicProgram p;
  p.A = sparse(a);
  p.b = a * x0;
  p.G = sparse(g);
  p.h = g * x0 + s0;
  p.c = -a.transpose() * y0 - g.transpose() * z0;
  p.cones = cones;
  const auto sol = solve_ipm(p);
  ASSERT_EQ(sol.status, ConicStatus::kOptimal) << sol.message;
  EXPECT_LT((a * sol.x - p.b).norm(), 1e-7);
  EXPECT_LT((g * sol.x + sol.s - p.h).norm(), 1e-7);
  EXPECT_LT((a.transpose() * sol.y + g.transpose() * sol.z + p.c).norm(), 1e-7);
  EXPECT_LT(std::abs(sol.s.dot(sol.z)), 1e-7);
  EXPECT_LT(boundary_shift(cones, sol.s), 1e-8);
  EXPECT_LT(boundary_shift(cones, sol.z), 1e-8);
  // Weak duality oracle: any dual-feasible point bounds the optimum.
  EXPECT_GE(sol.primal_objective, -(p.b.dot(y0) + p.h.dot(z0)) - 1e-7);
}

TEST(Program, DumpRoundTrip) {
  ConicProgram p;
  p.c = Vector::Unit(3, 0);
  Matrix a(1, 3);
  a << 0, 1, 1;
  p.A = sparse(a);
  p.b = Vector::Constant(1, 1.0 / 3.0);
  p.G = sparse(-Matrix::Identity(3, 3));
  p.h = Vector(3);
  p.h << 0, -3, -4;
  p.cones = {{ConeKind::kSecondOrder, 3}};
  std::stringstream ss;
  write_program(p, ss);
  const ConicProgram q = read_program(ss);
  EXPECT_EQ(q.b(0), p.b(0));
  EXPECT_EQ(Matrix(q.G), Matrix(p.G));
  EXPECT_EQ(q.cones.size(), 1u);
}

TEST(Backend, SelectsByName) {
  EXPECT_EQ(make_backend("ipm")->name(), "ipm");
  EXPECT_THROW(make_backend("simplex"), Error);
}
