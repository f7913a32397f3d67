#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "mmot/core.hpp"
#include "mmot/cost.hpp"

namespace mmot {

struct AssignmentResult {
  std::vector<std::uint32_t> perm;  // marginal-2 order against identity marginal-1
  double mean_cost = 0.0;
};

namespace detail {

// Pair cost c(x1_i, x2_j) under the problem's cost model.
inline double pair_cost(const CostModel& cost, const MarginalSamples& x1,
                        const MarginalSamples& x2, std::size_t i,
                        std::size_t j) {
  const double* pts[2] = {x1.point(i), x2.point(j)};
  return tuple_cost(cost, pts, 2, x1.dim);
}

// Kuhn-Munkres with potentials, O(n^3). Returns row -> column assignment.
inline std::vector<int> hungarian(const std::vector<double>& cost,
                                  std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = static_cast<int>(i);
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = static_cast<std::size_t>(p[j0]);
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = static_cast<int>(j0);
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[static_cast<std::size_t>(p[j])] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = static_cast<std::size_t>(way[j0]);
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> rowsol(n, -1);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] > 0) rowsol[static_cast<std::size_t>(p[j]) - 1] = static_cast<int>(j) - 1;
  return rowsol;
}

}  // namespace detail

// Globally optimal two-marginal assignment via the Hungarian algorithm on the
// dense pair-cost matrix. Cubic time, hence the size guard.
inline AssignmentResult exact_assignment_2m(const MarginalSamples& x1,
                                            const MarginalSamples& x2,
                                            const CostModel& cost,
                                            std::size_t max_points = 4096) {
  if (x1.num_points != x2.num_points)
    raise(ErrorCode::MismatchedCounts, "marginals differ in N_p");
  const std::size_t n = x1.num_points;
  if (n > max_points)
    raise(ErrorCode::TooLarge, "exact_assignment_2m capped at " +
                                   std::to_string(max_points) + " points");
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] = detail::pair_cost(cost, x1, x2, i, j);
  const std::vector<int> rowsol = detail::hungarian(c, n);
  AssignmentResult res;
  res.perm.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res.perm[i] = static_cast<std::uint32_t>(rowsol[i]);
    sum += c[i * n + static_cast<std::size_t>(rowsol[i])];
  }
  res.mean_cost = sum / static_cast<double>(n);
  return res;
}

struct BruteForceResult {
  std::vector<std::vector<std::uint32_t>> perms;  // perms[0] = identity
  double mean_cost = 0.0;
};

// Exhaustive enumeration over independent permutations of marginals 2..K,
// lexicographic order, first minimum kept. Guarded by (N_p!)^(K-1) <= 1e7.
inline BruteForceResult brute_force_mmot(const Problem& problem) {
  const std::size_t k = problem.num_marginals();
  const std::size_t np = problem.num_points();
  double combos = 1.0;
  double fact = 1.0;
  for (std::size_t i = 2; i <= np; ++i) fact *= static_cast<double>(i);
  for (std::size_t i = 1; i < k; ++i) combos *= fact;
  if (combos > 1e7)
    raise(ErrorCode::TooLarge, "brute_force_mmot: search space exceeds 1e7");

  std::vector<std::vector<std::uint32_t>> perms(k);
  for (auto& p : perms) {
    p.resize(np);
    std::iota(p.begin(), p.end(), 0u);
  }
  BruteForceResult best;
  best.mean_cost = std::numeric_limits<double>::infinity();
  std::vector<const double*> pts(k);
  auto eval = [&]() {
    double sum = 0.0;
    for (std::size_t r = 0; r < np; ++r) {
      for (std::size_t i = 0; i < k; ++i)
        pts[i] = problem.marginals[i].point(perms[i][r]);
      sum += tuple_cost(problem.cost, pts.data(), k, problem.dim());
    }
    const double mean = sum / static_cast<double>(np);
    if (mean < best.mean_cost) {
      best.mean_cost = mean;
      best.perms = perms;
    }
  };
  // Odometer over the K-1 free permutations.
  std::function<void(std::size_t)> recurse = [&](std::size_t i) {
    if (i == k) {
      eval();
      return;
    }
    do {
      recurse(i + 1);
    } while (std::next_permutation(perms[i].begin(), perms[i].end()));
    std::iota(perms[i].begin(), perms[i].end(), 0u);
  };
  recurse(1);
  return best;
}

// Mean cost of the monotone (sorted-against-sorted) pairing; exact for 1-D
// convex costs, used as a fast reference.
inline double sorted_1d_oracle(std::vector<double> x1, std::vector<double> x2,
                               double p) {
  if (x1.size() != x2.size())
    raise(ErrorCode::MismatchedCounts, "sorted_1d_oracle: size mismatch");
  std::sort(x1.begin(), x1.end());
  std::sort(x2.begin(), x2.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) sum += lp_term(x1[i] - x2[i], p);
  return sum / static_cast<double>(x1.size());
}

struct SinkhornResult {
  std::vector<double> coupling;  // N_p x N_p, row-major
  std::size_t num_points = 0;
  double reg_cost = 0.0;  // <coupling, C>
  std::size_t iterations = 0;
  bool converged = false;
};

// Entropic-OT fixed point on the Gibbs kernel exp(-C/lambda) with uniform
// marginals 1/N_p. Switches to log-domain updates when lambda is small
// relative to the cost scale.
inline SinkhornResult sinkhorn_2m(const MarginalSamples& x1,
                                  const MarginalSamples& x2, double lambda,
                                  std::size_t max_iter = 10000,
                                  double threshold = 1e-9,
                                  const CostModel& cost = PairwiseLp{2.0, 1.0}) {
  if (x1.num_points != x2.num_points)
    raise(ErrorCode::MismatchedCounts, "marginals differ in N_p");
  const std::size_t n = x1.num_points;
  if (n > 16384) raise(ErrorCode::TooLarge, "sinkhorn_2m capped at 16384 points");
  if (!(lambda > 0.0))
    raise(ErrorCode::NumericalUnderflow, "lambda must be > 0");

  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] = detail::pair_cost(cost, x1, x2, i, j);

  std::vector<double> med(c);
  std::nth_element(med.begin(), med.begin() + med.size() / 2, med.end());
  const double median_c = med[med.size() / 2];
  const bool log_domain = lambda < 0.05 * median_c;

  const double a = 1.0 / static_cast<double>(n);  // uniform marginal weight
  SinkhornResult res;
  res.num_points = n;
  res.coupling.assign(n * n, 0.0);

  auto violation = [&](const std::vector<double>& plan) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += plan[i * n + j];
      worst = std::max(worst, std::fabs(row - a));
    }
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += plan[i * n + j];
      worst = std::max(worst, std::fabs(col - a));
    }
    return worst;
  };

  if (!log_domain) {
    std::vector<double> kmat(n * n);
    for (std::size_t i = 0; i < n * n; ++i) kmat[i] = std::exp(-c[i] / lambda);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += kmat[i * n + j];
      if (row == 0.0)
        raise(ErrorCode::NumericalUnderflow,
              "Gibbs kernel vanished; increase lambda or rescale the cost");
    }
    std::vector<double> u(n, 1.0), v(n, 1.0);
    for (std::size_t it = 1; it <= max_iter; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += kmat[i * n + j] * v[j];
        if (s == 0.0 || !std::isfinite(s))
          raise(ErrorCode::NumericalUnderflow, "Sinkhorn scaling underflow");
        u[i] = a / s;
      }
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += kmat[i * n + j] * u[i];
        if (s == 0.0 || !std::isfinite(s))
          raise(ErrorCode::NumericalUnderflow, "Sinkhorn scaling underflow");
        v[j] = a / s;
      }
      res.iterations = it;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          res.coupling[i * n + j] = u[i] * kmat[i * n + j] * v[j];
      if (violation(res.coupling) <= threshold) {
        res.converged = true;
        break;
      }
    }
  } else {
    // Potentials f, g with P_ij = exp((f_i + g_j - C_ij) / lambda).
    const double log_a = std::log(a);
    std::vector<double> f(n, 0.0), g(n, 0.0), row(n);
    auto lse = [&](const std::vector<double>& vals) {
      const double m = *std::max_element(vals.begin(), vals.end());
      double s = 0.0;
      for (double x : vals) s += std::exp(x - m);
      return m + std::log(s);
    };
    for (std::size_t it = 1; it <= max_iter; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
          row[j] = (g[j] - c[i * n + j]) / lambda;
        f[i] = lambda * (log_a - lse(row));
      }
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i)
          row[i] = (f[i] - c[i * n + j]) / lambda;
        g[j] = lambda * (log_a - lse(row));
      }
      res.iterations = it;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          res.coupling[i * n + j] =
              std::exp((f[i] + g[j] - c[i * n + j]) / lambda);
      if (violation(res.coupling) <= threshold) {
        res.converged = true;
        break;
      }
    }
  }

  double cost_sum = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) cost_sum += res.coupling[i] * c[i];
  res.reg_cost = cost_sum;
  return res;
}

}  // namespace mmot
