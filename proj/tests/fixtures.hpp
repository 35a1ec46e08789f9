#pragma once

#include <random>

#include "gain.hpp"
#include "problem.hpp"

namespace covsteer::fx {

// Planar double integrator with a single [1 1] x <= 20 row over k = 0..10.
inline ProblemSpec double_integrator(bool with_rows = true) {
  ProblemSpec spec;
  spec.horizon = 10;
  Matrix a(2, 2);
  a << 1, 1, 0, 1;
  Matrix b(2, 1);
  b << 0, 1;
  const Matrix d = 0.01 * Matrix::Identity(2, 2);
  for (int k = 0; k < spec.horizon; ++k) {
    spec.systems.push_back({a, b, d});
    spec.costs.push_back({Matrix::Zero(2, 2), Matrix::Identity(1, 1)});
  }
  spec.initial.mean = Vector(2);
  spec.initial.mean << 0, 8;
  spec.initial.cov = Matrix(2, 2);
  spec.initial.cov << 1, 0, 0, 0.5;
  spec.terminal.mean = Vector(2);
  spec.terminal.mean << 6, 0;
  spec.terminal.cov = 0.5 * Matrix::Identity(2, 2);
  if (with_rows) {
    HalfspaceConstraint row;
    row.a = Vector::Ones(2);
    row.b = 20.0;
    for (int k = 0; k <= spec.horizon; ++k) row.steps.push_back(k);
    spec.halfspaces.push_back(row);
    spec.total_risk = 0.011;
  }
  return spec;
}

// Vehicle between two lines through (1, 0), step 0.2.
inline ProblemSpec vehicle() {
  const double dt = 0.2;
  ProblemSpec spec;
  spec.horizon = 20;
  Matrix a = Matrix::Identity(4, 4);
  a(0, 2) = dt;
  a(1, 3) = dt;
  Matrix b = Matrix::Zero(4, 2);
  b(0, 0) = dt * dt;
  b(1, 1) = dt * dt;
  b(2, 0) = dt;
  b(3, 1) = dt;
  const Matrix d = 0.01 * Matrix::Identity(4, 4);
  Matrix q = Matrix::Zero(4, 4);
  q.diagonal() << 10, 10, 1, 1;
  const Matrix r = 1e3 * Matrix::Identity(2, 2);
  for (int k = 0; k < spec.horizon; ++k) {
    spec.systems.push_back({a, b, d});
    spec.costs.push_back({q, r});
  }
  spec.initial.mean = Vector(4);
  spec.initial.mean << -10, 1, 0, 0;
  spec.initial.cov = Matrix::Zero(4, 4);
  spec.initial.cov.diagonal() << 0.1, 0.1, 0.01, 0.01;
  spec.terminal.mean = Vector::Zero(4);
  spec.terminal.cov = 0.5 * spec.initial.cov;
  for (double sign : {1.0, -1.0}) {
    HalfspaceConstraint row;
    row.a = Vector::Zero(4);
    row.a << 0.2, sign, 0, 0;
    row.b = 0.2;
    for (int k = 0; k <= spec.horizon; ++k) row.steps.push_back(k);
    row.p_fail = 0.0005;
    spec.halfspaces.push_back(row);
  }
  return spec;
}

// x_{k+1} = x_k + u_k + sigma w_k, N = 2, q = r = 1, mu0 = 1 -> muN = 0.
inline ProblemSpec scalar_two_step(double sigma = 0.3) {
  ProblemSpec spec;
  spec.horizon = 2;
  const Matrix one = Matrix::Ones(1, 1);
  for (int k = 0; k < 2; ++k) {
    spec.systems.push_back({one, one, sigma * one});
    spec.costs.push_back({one, one});
  }
  spec.initial.mean = Vector::Ones(1);
  spec.initial.cov = 0.2 * one;
  spec.terminal.mean = Vector::Zero(1);
  spec.terminal.cov = one;
  return spec;
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * n01(rng);
  return m;
}

inline Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  return random_matrix(n, 1, rng, scale);
}

inline Matrix random_spd(int n, std::mt19937_64& rng, double floor = 0.1) {
  const Matrix g = random_matrix(n, n, rng);
  return g * g.transpose() / n + floor * Matrix::Identity(n, n);
}

// Random time-varying system with every step weight drawn independently.
inline ProblemSpec random_ltv(int horizon, int nx, int nu, int nw, std::mt19937_64& rng) {
  ProblemSpec spec;
  spec.horizon = horizon;
  for (int k = 0; k < horizon; ++k) {
    spec.systems.push_back({Matrix::Identity(nx, nx) + random_matrix(nx, nx, rng, 0.3),
                            random_matrix(nx, nu, rng), random_matrix(nx, nw, rng, 0.1)});
    const Matrix q = random_matrix(nx, nx, rng);
    spec.costs.push_back({q * q.transpose() / nx, random_spd(nu, rng, 0.5)});
  }
  spec.initial.mean = random_vector(nx, rng);
  spec.initial.cov = random_spd(nx, rng, 0.05) * 0.1;
  spec.terminal.mean = random_vector(nx, rng);
  spec.terminal.cov = 100.0 * Matrix::Identity(nx, nx);
  return spec;
}

// Random gains respecting the causal pattern.
struct GainLayoutProbe {
  int horizon;
  int nx;
  int nu;

  Matrix random_causal(std::mt19937_64& rng, double scale = 0.1) const {
    const GainLayout layout(horizon, nx, nu);
    return layout.project(random_matrix(layout.rows(), layout.cols(), rng, scale));
  }
};

}  // namespace covsteer::fx
