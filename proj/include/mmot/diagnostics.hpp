#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mmot/core.hpp"
#include "mmot/ingest.hpp"
#include "mmot/solvers.hpp"

namespace mmot {

// Marginal preservation is structural: sample data is never written, so it
// holds exactly iff every perm is still a bijection of {0,...,N_p-1}.
inline bool check_marginal_preservation(const Problem& problem,
                                        const CouplingState& state) {
  const std::size_t np = problem.num_points();
  if (state.perms.size() != problem.num_marginals()) return false;
  std::vector<char> seen(np);
  for (const auto& perm : state.perms) {
    if (perm.size() != np) return false;
    std::fill(seen.begin(), seen.end(), 0);
    for (std::uint32_t v : perm) {
      if (v >= np || seen[v]) return false;
      seen[v] = 1;
    }
  }
  return true;
}

inline bool verify_monotone(std::span<const double> trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double slack = 1e-12 * std::max(1.0, std::fabs(trace[i - 1]));
    if (trace[i] > trace[i - 1] + slack) return false;
  }
  return true;
}

struct DecayFit {
  double alpha_hat = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
};

// Least-squares slope of log(trace[t] - stationary) vs t over the points
// before the error first drops below 1e-3 of its initial value.
inline DecayFit fit_exponential_decay(std::span<const double> trace,
                                      double stationary) {
  std::vector<double> logs;
  logs.reserve(trace.size());
  const double err0 = trace.empty() ? 0.0 : trace[0] - stationary;
  for (double m : trace) {
    const double err = m - stationary;
    if (!(err > 0.0) || err < 1e-3 * err0) break;
    logs.push_back(std::log(err));
  }
  if (logs.size() < 3)
    raise(ErrorCode::DegenerateTrace,
          "fewer than 3 usable points for decay fit");
  const double n = static_cast<double>(logs.size());
  double st = 0.0, sy = 0.0;
  for (std::size_t t = 0; t < logs.size(); ++t) {
    st += static_cast<double>(t);
    sy += logs[t];
  }
  const double tbar = st / n, ybar = sy / n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t t = 0; t < logs.size(); ++t) {
    const double dt = static_cast<double>(t) - tbar;
    stt += dt * dt;
    sty += dt * (logs[t] - ybar);
  }
  const double slope = sty / stt;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t t = 0; t < logs.size(); ++t) {
    const double fit = ybar + slope * (static_cast<double>(t) - tbar);
    ss_res += (logs[t] - fit) * (logs[t] - fit);
    ss_tot += (logs[t] - ybar) * (logs[t] - ybar);
  }
  DecayFit out;
  out.alpha_hat = -slope;
  out.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  out.points_used = logs.size();
  return out;
}

enum class SweepMethod { collision, isa };

struct ScalingPoint {
  std::size_t num_points = 0;
  double ms_per_sweep = 0.0;
};

// Median per-sweep wall time of a two-marginal problem (template family vs
// standard normal) at each size.
inline std::vector<ScalingPoint> measure_sweep_scaling(
    const SyntheticSpec& family, std::span<const std::size_t> sizes,
    std::size_t sweeps, SweepMethod method = SweepMethod::collision) {
  std::vector<ScalingPoint> out;
  for (std::size_t np : sizes) {
    SyntheticSpec a = family;
    a.num_points = np;
    SyntheticSpec b;
    b.family = Family::normal;
    b.dim = (family.family == Family::normal || family.family == Family::uniform)
                ? family.dim
                : 2;
    b.num_points = np;
    b.seed = family.seed + 1;
    Problem problem = new_problem({sample_synthetic(a), sample_synthetic(b)},
                                  PairwiseLp{2.0, 1.0});
    SolverConfig cfg;
    cfg.seed = family.seed;
    CouplingState state = init_coupling(problem, cfg);
    std::vector<double> times;
    times.reserve(sweeps);
    for (std::size_t s = 0; s < sweeps; ++s) {
      const SweepStats stats = method == SweepMethod::collision
                                   ? collision_sweep(problem, state)
                                   : isa_sweep(problem, state);
      times.push_back(stats.wall_ms);
    }
    std::nth_element(times.begin(), times.begin() + times.size() / 2,
                     times.end());
    out.push_back({np, times[times.size() / 2]});
  }
  return out;
}

}  // namespace mmot
