#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mmot/cost_model.hpp"
#include "mmot/error.hpp"
#include "mmot/rng.hpp"

namespace mmot {

// One marginal's point cloud: num_points samples of dimension dim, stored
// row-major. Sample data is immutable once a Problem owns it; solvers only
// permute indices.
struct MarginalSamples {
  std::string id;
  std::size_t dim = 0;
  std::size_t num_points = 0;
  std::vector<double> data;  // num_points * dim, row-major

  const double* point(std::size_t i) const { return data.data() + i * dim; }
};

inline MarginalSamples make_samples(std::string id, std::size_t dim,
                                    std::vector<double> data) {
  MarginalSamples m;
  m.id = std::move(id);
  m.dim = dim;
  m.num_points = dim == 0 ? 0 : data.size() / dim;
  m.data = std::move(data);
  return m;
}

struct Problem {
  std::vector<MarginalSamples> marginals;
  CostModel cost;

  std::size_t num_marginals() const { return marginals.size(); }
  std::size_t num_points() const { return marginals.front().num_points; }
  std::size_t dim() const { return marginals.front().dim; }
};

inline Problem new_problem(std::vector<MarginalSamples> marginals,
                           CostModel cost) {
  if (marginals.size() < 2)
    raise(ErrorCode::MismatchedCounts, "need at least 2 marginals");
  validate_cost_model(cost);
  const std::size_t np = marginals.front().num_points;
  const std::size_t dim = marginals.front().dim;
  for (const auto& m : marginals) {
    if (m.num_points == 0)
      raise(ErrorCode::MismatchedCounts, "marginal '" + m.id + "' is empty");
    if (m.num_points != np)
      raise(ErrorCode::MismatchedCounts,
            "marginal '" + m.id + "' has " + std::to_string(m.num_points) +
                " points, expected " + std::to_string(np));
    if (m.data.size() != m.num_points * m.dim)
      raise(ErrorCode::MismatchedDims,
            "marginal '" + m.id + "' data length != num_points * dim");
    if (is_pairwise_lp(cost) && m.dim != dim)
      raise(ErrorCode::MismatchedDims,
            "marginal '" + m.id + "' has dim " + std::to_string(m.dim) +
                ", expected " + std::to_string(dim));
    for (double v : m.data)
      if (!std::isfinite(v))
        raise(ErrorCode::NonFinite,
              "marginal '" + m.id + "' contains a non-finite value");
  }
  return Problem{std::move(marginals), std::move(cost)};
}

enum class InitMode { identity, random_shuffle };

struct SolverConfig {
  double tolerance = 0.0;        // relative cost decrease threshold
  std::size_t window = 50;       // sweeps over which the decrease is measured
  std::size_t max_sweeps = 1000;
  std::size_t recompute_interval = 100;  // full-cost refresh period
  std::uint64_t seed = 0;
  InitMode init = InitMode::identity;
  unsigned threads = 1;          // worker threads for delta evaluation
};

inline void validate_config(const SolverConfig& cfg) {
  if (cfg.max_sweeps < 1)
    raise(ErrorCode::IndexOutOfRange, "max_sweeps must be >= 1");
  if (cfg.recompute_interval < 1)
    raise(ErrorCode::IndexOutOfRange, "recompute_interval must be >= 1");
  if (cfg.window < 1) raise(ErrorCode::IndexOutOfRange, "window must be >= 1");
  if (cfg.tolerance < 0.0)
    raise(ErrorCode::IndexOutOfRange, "tolerance must be >= 0");
}

// Current joint pairing: perms[i][r] is the sample of marginal i that sits in
// joint tuple r. total_cost is the running unnormalized sum over tuples,
// maintained with Kahan compensation so incremental deltas don't drift.
struct CouplingState {
  std::vector<std::vector<std::uint32_t>> perms;
  double total_cost = 0.0;
  double cost_comp = 0.0;  // Kahan compensation for total_cost
  std::size_t sweep_count = 0;
  std::mt19937_64 rng;

  std::size_t num_points() const { return perms.front().size(); }

  void add_cost(double delta) {
    const double y = delta - cost_comp;
    const double t = total_cost + y;
    cost_comp = (t - total_cost) - y;
    total_cost = t;
  }

  double mean() const {
    return total_cost / static_cast<double>(num_points());
  }

  // Gathers the K points of tuple r into `out` (size K).
  void tuple_points(const Problem& problem, std::size_t r,
                    const double** out) const {
    for (std::size_t i = 0; i < perms.size(); ++i)
      out[i] = problem.marginals[i].point(perms[i][r]);
  }
};

// Full recomputation of the cost sum over all tuples (Kahan-compensated).
inline double total_cost_recompute(const Problem& problem,
                                   const CouplingState& state) {
  const std::size_t k = problem.num_marginals();
  const std::size_t np = problem.num_points();
  std::vector<const double*> pts(k);
  double sum = 0.0, comp = 0.0;
  for (std::size_t r = 0; r < np; ++r) {
    state.tuple_points(problem, r, pts.data());
    const double c = tuple_cost(problem.cost, pts.data(), k, problem.dim());
    const double y = c - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

inline CouplingState init_coupling(const Problem& problem,
                                   const SolverConfig& config) {
  validate_config(config);
  const std::size_t k = problem.num_marginals();
  const std::size_t np = problem.num_points();
  CouplingState state;
  state.rng.seed(config.seed);
  state.perms.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& p = state.perms[i];
    p.resize(np);
    std::iota(p.begin(), p.end(), 0u);
    // perms[0] stays identity so tuples are anchored to marginal 1's order.
    if (i > 0 && config.init == InitMode::random_shuffle)
      rng::shuffle(p, state.rng);
  }
  state.total_cost = total_cost_recompute(problem, state);
  state.cost_comp = 0.0;
  return state;
}

}  // namespace mmot
