#pragma once

#include <cstddef>
#include <vector>

#include "mmot/core.hpp"
#include "mmot/cost_model.hpp"

namespace mmot {

// Mean coupling cost by full recomputation. Reference path; solvers maintain
// the running sum separately and reconcile against this periodically.
inline double mean_cost(const Problem& problem, const CouplingState& state) {
  return total_cost_recompute(problem, state) /
         static_cast<double>(problem.num_points());
}

// Change in total_cost if the marginal-k entries of tuples a and b were
// exchanged. For PairwiseLp this is O(dim * K), independent of N_p; for
// GenericTuple it falls back to 4 tuple evaluations.
inline double swap_delta(const Problem& problem, const CouplingState& state,
                         std::size_t marginal, std::size_t a, std::size_t b) {
  const std::size_t k = problem.num_marginals();
  const std::size_t np = problem.num_points();
  if (marginal >= k) raise(ErrorCode::IndexOutOfRange, "marginal out of range");
  if (a >= np || b >= np)
    raise(ErrorCode::IndexOutOfRange, "tuple position out of range");
  if (a == b) raise(ErrorCode::SamePosition, "swap positions must differ");

  if (const auto* lp = std::get_if<PairwiseLp>(&problem.cost)) {
    const std::size_t dim = problem.dim();
    const double p = lp->p;
    const double* xa_k = problem.marginals[marginal].point(state.perms[marginal][a]);
    const double* xb_k = problem.marginals[marginal].point(state.perms[marginal][b]);
    double s = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      if (l == marginal) continue;
      const double* xa_l = problem.marginals[l].point(state.perms[l][a]);
      const double* xb_l = problem.marginals[l].point(state.perms[l][b]);
      s += lp_dist_pow(xa_l, xb_k, dim, p) + lp_dist_pow(xb_l, xa_k, dim, p) -
           lp_dist_pow(xa_l, xa_k, dim, p) - lp_dist_pow(xb_l, xb_k, dim, p);
    }
    return lp->pair_weight * s;
  }

  std::vector<const double*> ta(k), tb(k);
  state.tuple_points(problem, a, ta.data());
  state.tuple_points(problem, b, tb.data());
  const double before = tuple_cost(problem.cost, ta.data(), k, problem.dim()) +
                        tuple_cost(problem.cost, tb.data(), k, problem.dim());
  std::swap(ta[marginal], tb[marginal]);
  const double after = tuple_cost(problem.cost, ta.data(), k, problem.dim()) +
                       tuple_cost(problem.cost, tb.data(), k, problem.dim());
  return after - before;
}

// The d^p distance estimator for the current pairing:
//   d^p(X) = sum_{j>k} sum_i ||X_i^(j) - X_i^(k)||_p^p / N_p
// For K=2, p=2 this is the squared-L2 transport cost of the coupling.
inline double wasserstein_estimate(const Problem& problem,
                                   const CouplingState& state, double p) {
  const std::size_t k = problem.num_marginals();
  const std::size_t np = problem.num_points();
  const std::size_t dim = problem.dim();
  for (const auto& m : problem.marginals)
    if (m.dim != dim)
      raise(ErrorCode::DimensionMismatch,
            "wasserstein_estimate requires equal dimensions");
  double sum = 0.0;
  for (std::size_t r = 0; r < np; ++r)
    for (std::size_t i = 0; i < k; ++i) {
      const double* xi = problem.marginals[i].point(state.perms[i][r]);
      for (std::size_t j = i + 1; j < k; ++j) {
        const double* xj = problem.marginals[j].point(state.perms[j][r]);
        sum += lp_dist_pow(xi, xj, dim, p);
      }
    }
  return sum / static_cast<double>(np);
}

}  // namespace mmot
