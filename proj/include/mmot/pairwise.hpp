#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mmot/core.hpp"
#include "mmot/cost.hpp"
#include "mmot/solvers.hpp"

namespace mmot {

enum class PairwiseMode { mmot, pairwise2 };

struct PairwiseResult {
  std::size_t k = 0;
  std::vector<double> matrix;  // K x K symmetric d^p estimates, zero diagonal
  std::vector<std::vector<std::size_t>> nearest;  // per marginal, ascending
  bool from_mmot = false;
  RunReport report;          // the joint run (mmot) or the last pair run
  double ms_per_sweep = 0.0; // median over recorded sweeps
};

namespace detail {

inline double paired_dp(const MarginalSamples& a, const MarginalSamples& b,
                        const std::vector<std::uint32_t>& pa,
                        const std::vector<std::uint32_t>& pb, double p) {
  double sum = 0.0;
  for (std::size_t r = 0; r < pa.size(); ++r)
    sum += lp_dist_pow(a.point(pa[r]), b.point(pb[r]), a.dim, p);
  return sum / static_cast<double>(pa.size());
}

inline double median_sweep_ms(const RunReport& report) {
  if (report.trace.empty()) return 0.0;
  std::vector<double> t;
  t.reserve(report.trace.size());
  for (const auto& pt : report.trace) t.push_back(pt.wall_ms);
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

}  // namespace detail

// Pairwise d^p distance matrix over K marginals. mmot mode runs one joint
// K-marginal collision solve and reads every pair distance off the final
// pairing (upper bounds of the per-pair optima); pairwise2 solves each
// 2-marginal problem independently.
inline PairwiseResult pairwise_distances(std::vector<MarginalSamples> marginals,
                                         PairwiseMode mode, double p,
                                         const SolverConfig& config) {
  const std::size_t k = marginals.size();
  if (k < 2) raise(ErrorCode::MismatchedCounts, "need at least 2 marginals");
  PairwiseResult res;
  res.k = k;
  res.matrix.assign(k * k, 0.0);
  res.from_mmot = mode == PairwiseMode::mmot;

  if (mode == PairwiseMode::mmot) {
    Problem problem = new_problem(std::move(marginals), PairwiseLp{p, 1.0});
    auto [state, report] = collision_solve(problem, config);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        const double d =
            detail::paired_dp(problem.marginals[i], problem.marginals[j],
                              state.perms[i], state.perms[j], p);
        res.matrix[i * k + j] = res.matrix[j * k + i] = d;
      }
    res.ms_per_sweep = detail::median_sweep_ms(report);
    res.report = std::move(report);
  } else {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        Problem pair =
            new_problem({marginals[i], marginals[j]}, PairwiseLp{p, 1.0});
        auto [state, report] = collision_solve(pair, config);
        const double d = state.total_cost / static_cast<double>(
                                                pair.num_points());
        res.matrix[i * k + j] = res.matrix[j * k + i] = d;
        res.ms_per_sweep = detail::median_sweep_ms(report);
        res.report = std::move(report);
      }
  }

  res.nearest.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return res.matrix[i * k + a] < res.matrix[i * k + b];
    });
    res.nearest[i] = std::move(order);
  }
  return res;
}

}  // namespace mmot
