#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <variant>

#include "mmot/error.hpp"

namespace mmot {

// Pairwise-sum L^p cost over all marginal pairs:
//   c(x_1,...,x_K) = w * sum_{i<j} sum_d |x_i[d] - x_j[d]|^p
// w = 1 gives the d^p distance estimator, w = 1/2 the Gangbo-Swiech cost.
struct PairwiseLp {
  double p = 2.0;
  double pair_weight = 1.0;
};

// Arbitrary black-box tuple cost. `points` holds K pointers, one point per
// marginal; the callable knows K and the per-marginal dimensions.
struct GenericTuple {
  std::function<double(const double* const* points)> eval;
};

using CostModel = std::variant<PairwiseLp, GenericTuple>;

inline bool is_pairwise_lp(const CostModel& cost) {
  return std::holds_alternative<PairwiseLp>(cost);
}

inline void validate_cost_model(const CostModel& cost) {
  if (const auto* lp = std::get_if<PairwiseLp>(&cost)) {
    if (!(lp->p >= 1.0))
      raise(ErrorCode::DimensionMismatch, "PairwiseLp requires p >= 1");
    if (!(lp->pair_weight > 0.0))
      raise(ErrorCode::DimensionMismatch, "PairwiseLp requires pair_weight > 0");
  }
}

// |d|^p with fast paths for the two exponents that dominate in practice.
inline double lp_term(double d, double p) {
  if (p == 2.0) return d * d;
  if (p == 1.0) return std::fabs(d);
  return std::pow(std::fabs(d), p);
}

// sum_d |a[d] - b[d]|^p  (the p-th power of the L^p distance, no root).
inline double lp_dist_pow(const double* a, const double* b, std::size_t dim,
                          double p) {
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = a[d] - b[d];
      s += diff * diff;
    }
  } else if (p == 1.0) {
    for (std::size_t d = 0; d < dim; ++d) s += std::fabs(a[d] - b[d]);
  } else {
    for (std::size_t d = 0; d < dim; ++d)
      s += std::pow(std::fabs(a[d] - b[d]), p);
  }
  return s;
}

// Cost of one K-tuple. `points` holds one pointer per marginal; `dim` is the
// shared dimension (PairwiseLp only; GenericTuple ignores it).
inline double tuple_cost(const CostModel& cost, const double* const* points,
                         std::size_t num_marginals, std::size_t dim) {
  if (const auto* lp = std::get_if<PairwiseLp>(&cost)) {
    double s = 0.0;
    for (std::size_t i = 0; i < num_marginals; ++i)
      for (std::size_t j = i + 1; j < num_marginals; ++j)
        s += lp_dist_pow(points[i], points[j], dim, lp->p);
    return lp->pair_weight * s;
  }
  return std::get<GenericTuple>(cost).eval(points);
}

}  // namespace mmot
