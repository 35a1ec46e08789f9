#include "policy.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "gain.hpp"
#include "rng.hpp"

namespace covsteer {

namespace {

void check_shape(const Matrix& m, const LiftedSystem& lifted, const char* what) {
  if (m.rows() != lifted.input_dim() || m.cols() != lifted.stacked_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " must be N nu x (N+2) nx");
  }
}

// Hard-zero everything outside the causal pattern.
Matrix causal(const Matrix& m, const LiftedSystem& lifted) {
  return GainLayout(lifted.horizon, lifted.nx, lifted.nu).project(m);
}

// Solves X M = rhs for unit lower triangular M.
Matrix solve_right_unit_lower(const Matrix& m, const Matrix& rhs) {
  return m.transpose().triangularView<Eigen::UnitUpper>().solve(rhs.transpose()).transpose();
}

}  // namespace

FeedbackPolicy recover_L(const Matrix& K, const LiftedSystem& lifted) {
  check_shape(K, lifted, "K");
  // boldB K is strictly lower block triangular, so I + boldB K is unit lower
  // triangular.
  Matrix m = lifted.boldB * K;
  m.diagonal().array() += 1.0;
  FeedbackPolicy policy;
  policy.K = K;
  policy.L = causal(solve_right_unit_lower(m, K), lifted);
  const int nx = lifted.nx;
  const int nu = lifted.nu;
  for (int k = 0; k < lifted.horizon; ++k) {
    policy.step_gains.push_back(policy.L.block(k * nu, 0, nu, (k + 2) * nx));
  }
  return policy;
}

Matrix gain_from_L(const Matrix& L, const LiftedSystem& lifted) {
  check_shape(L, lifted, "L");
  Matrix m = -(lifted.boldB * L);
  m.diagonal().array() += 1.0;
  return causal(solve_right_unit_lower(m, L), lifted);
}

ClosedMoments closed_moments(const Matrix& K, const LiftedSystem& lifted) {
  check_shape(K, lifted, "K");
  Matrix m = lifted.boldB * K;
  m.diagonal().array() += 1.0;
  ClosedMoments out;
  out.nx = lifted.nx;
  out.mean = m * lifted.open_loop_mean();
  out.cov = symmetric_part(m * lifted.open_loop_covariance() * m.transpose());
  return out;
}

namespace {

class Simulator {
 public:
  Simulator(const FeedbackPolicy& policy, const ProblemSpec& spec)
      : policy_(policy), spec_(spec), nx_(spec.nx()), nw_(spec.nw()) {
    if (static_cast<int>(policy.step_gains.size()) != spec.horizon) {
      throw Error(ErrorCode::kDimensionMismatch, "policy horizon does not match the problem");
    }
    for (int k = 0; k < spec.horizon; ++k) {
      if (policy.step_gains[k].rows() != spec.nu() ||
          policy.step_gains[k].cols() != (k + 2) * nx_) {
        throw Error(ErrorCode::kDimensionMismatch, "policy step gain has the wrong shape");
      }
    }
    root0_ = psd_sqrt(spec.initial.cov);
  }

  // Fills bold X = [1; x_0; ...; x_N] and returns the realised cost.
  double run(std::uint64_t seed, Vector& bold_x, Trajectory* traj) const {
    NormalStream normal(seed);
    const int n = spec_.horizon;
    bold_x.resize((n + 2) * nx_);
    bold_x.head(nx_).setOnes();
    Vector xi(nx_);
    for (int i = 0; i < nx_; ++i) xi(i) = normal.next();
    bold_x.segment(nx_, nx_) = spec_.initial.mean + root0_ * xi;
    Vector w(nw_);
    double cost = 0.0;
    for (int k = 0; k < n; ++k) {
      const auto x = bold_x.segment((k + 1) * nx_, nx_);
      const Vector u = policy_.step_gains[k] * bold_x.head((k + 2) * nx_);
      for (int i = 0; i < nw_; ++i) w(i) = normal.next();
      const auto& sys = spec_.systems[k];
      const auto& c = spec_.costs[k];
      cost += x.dot(c.Q * x) + u.dot(c.R * u);
      bold_x.segment((k + 2) * nx_, nx_) = sys.A * x + sys.B * u + sys.D * w;
      if (traj) traj->u.push_back(u);
    }
    if (traj) {
      for (int k = 0; k <= n; ++k) traj->x.push_back(bold_x.segment((k + 1) * nx_, nx_));
      traj->cost = cost;
    }
    return cost;
  }

 private:
  const FeedbackPolicy& policy_;
  const ProblemSpec& spec_;
  int nx_;
  int nw_;
  Matrix root0_;
};

// Running first and second central moments, merged with Chan's update.
struct Accumulator {
  std::int64_t count = 0;
  Vector mean;
  Matrix m2;
  double cost_mean = 0.0;
  double cost_m2 = 0.0;
  std::vector<std::int64_t> violations;
  std::int64_t union_violations = 0;

  void init(int dim, std::size_t rows) {
    mean = Vector::Zero(dim);
    m2 = Matrix::Zero(dim, dim);
    violations.assign(rows, 0);
  }

  void add(const Vector& x, double cost) {
    ++count;
    const Vector delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2.selfadjointView<Eigen::Lower>().rankUpdate(delta, 1.0 - 1.0 / static_cast<double>(count));
    const double dc = cost - cost_mean;
    cost_mean += dc / static_cast<double>(count);
    cost_m2 += dc * (cost - cost_mean);
  }

  void merge(const Accumulator& other) {
    if (other.count == 0) return;
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double nt = na + nb;
    const Vector delta = other.mean - mean;
    mean += delta * (nb / nt);
    m2 += other.m2;
    m2.selfadjointView<Eigen::Lower>().rankUpdate(delta, na * nb / nt);
    const double dc = other.cost_mean - cost_mean;
    cost_mean += dc * nb / nt;
    cost_m2 += other.cost_m2 + dc * dc * na * nb / nt;
    count += other.count;
    for (std::size_t j = 0; j < violations.size(); ++j) violations[j] += other.violations[j];
    union_violations += other.union_violations;
  }
};

constexpr std::int64_t kChunk = 2048;

}  // namespace

Trajectory rollout(const FeedbackPolicy& policy, const ProblemSpec& spec, std::uint64_t seed) {
  Simulator sim(policy, spec);
  Trajectory traj;
  Vector bold_x;
  sim.run(seed, bold_x, &traj);
  return traj;
}

SimReport monte_carlo(const FeedbackPolicy& policy, const ProblemSpec& spec,
                      const std::vector<DeterministicRow>& rows, const SimOptions& options) {
  if (options.samples < 1) {
    throw Error(ErrorCode::kInvalidArgument, "monte_carlo: sample count must be at least 1");
  }
  const Simulator sim(policy, spec);
  const int nx = spec.nx();
  const int n = spec.horizon;
  const int dim = (n + 2) * nx;
  for (const auto& row : rows) {
    if (row.alpha.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "monte_carlo: row length must be (N+2) nx");
    }
  }

  const std::int64_t chunks = (options.samples + kChunk - 1) / kChunk;
  std::vector<Accumulator> partial(static_cast<std::size_t>(chunks));
  const std::int64_t keep = std::clamp<std::int64_t>(options.keep_terminal, 0, options.samples);
  std::vector<Vector> terminal(static_cast<std::size_t>(keep));

  auto run_chunk = [&](std::int64_t c) {
    Accumulator& acc = partial[static_cast<std::size_t>(c)];
    acc.init(dim, rows.size());
    Vector bold_x;
    const std::int64_t begin = c * kChunk;
    const std::int64_t end = std::min(options.samples, begin + kChunk);
    for (std::int64_t i = begin; i < end; ++i) {
      const double cost = sim.run(sample_seed(options.seed, static_cast<std::uint64_t>(i)),
                                  bold_x, nullptr);
      bool any = false;
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[j].alpha.dot(bold_x) > rows[j].beta) {
          ++acc.violations[j];
          any = true;
        }
      }
      if (any) ++acc.union_violations;
      acc.add(bold_x, cost);
      if (i < keep) terminal[static_cast<std::size_t>(i)] = bold_x.tail(nx);
    }
  };

  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = static_cast<int>(std::clamp<std::int64_t>(threads, 1, chunks));
  if (threads == 1) {
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::int64_t c = next++; c < chunks; c = next++) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  Accumulator total;
  total.init(dim, rows.size());
  for (const auto& acc : partial) total.merge(acc);

  SimReport rep;
  rep.samples = options.samples;
  rep.seed = options.seed;
  rep.rng = kRngDescription;
  const double count = static_cast<double>(total.count);
  Matrix cov = Matrix::Zero(dim, dim);
  if (total.count > 1) cov = Matrix(total.m2.selfadjointView<Eigen::Lower>()) / (count - 1.0);
  for (int k = 0; k <= n; ++k) {
    rep.mean.push_back(total.mean.segment((k + 1) * nx, nx));
    rep.cov.push_back(symmetric_part(cov.block((k + 1) * nx, (k + 1) * nx, nx, nx)));
  }
  rep.cost_mean = total.cost_mean;
  rep.cost_stderr = total.count > 1 ? std::sqrt(total.cost_m2 / (count - 1.0) / count) : 0.0;
  for (auto v : total.violations) rep.row_violation.push_back(static_cast<double>(v) / count);
  rep.union_violation = static_cast<double>(total.union_violations) / count;
  rep.terminal_samples = std::move(terminal);
  return rep;
}

}  // namespace covsteer
