#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <thread>
#include <utility>
#include <vector>

#include "mmot/core.hpp"
#include "mmot/cost.hpp"

namespace mmot {

// Random disjoint pairing (I_k, J_k) of tuple positions for one collision
// sweep over one marginal. For odd N_p one position sits out.
struct PairingPlan {
  std::vector<std::uint32_t> I, J;
};

struct SweepStats {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  double cost_after = 0.0;
  double wall_ms = 0.0;
};

struct TracePoint {
  double mean_cost = 0.0;
  std::size_t accepted = 0;
  std::size_t cumulative_candidates = 0;
  double wall_ms = 0.0;
};

struct RunReport {
  double final_mean_cost = 0.0;
  std::size_t sweeps_run = 0;
  std::vector<TracePoint> trace;
  bool converged = false;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
};

inline PairingPlan make_pairing(std::size_t num_points, std::mt19937_64& gen) {
  if (num_points < 2)
    raise(ErrorCode::TooFewPoints, "pairing needs at least 2 points");
  std::vector<std::uint32_t> order(num_points);
  std::iota(order.begin(), order.end(), 0u);
  rng::shuffle(order, gen);
  const std::size_t half = num_points / 2;
  PairingPlan plan;
  plan.I.assign(order.begin(), order.begin() + half);
  plan.J.assign(order.begin() + half, order.begin() + 2 * half);
  return plan;
}

namespace detail {

// Deltas for one marginal's pairing plan, evaluated against the current state.
// Pairs in a plan touch disjoint tuples, so evaluation order does not matter
// and the result is identical for any thread count.
inline void plan_deltas(const Problem& problem, const CouplingState& state,
                        std::size_t marginal, const PairingPlan& plan,
                        std::vector<double>& deltas, unsigned threads) {
  const std::size_t npairs = plan.I.size();
  deltas.resize(npairs);
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k)
      deltas[k] = swap_delta(problem, state, marginal, plan.I[k], plan.J[k]);
  };
  if (threads <= 1 || npairs < 64) {
    run(0, npairs);
    return;
  }
  const std::size_t nt = std::min<std::size_t>(threads, npairs);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (npairs + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(lo + chunk, npairs);
    if (lo >= hi) break;
    pool.emplace_back(run, lo, hi);
  }
  for (auto& th : pool) th.join();
}

inline double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace detail

// One collision sweep: per marginal, one random pairing of K*floor(N_p/2)
// candidates, each accepted iff its delta is strictly negative.
inline SweepStats collision_sweep(const Problem& problem, CouplingState& state,
                                  unsigned threads = 1) {
  const double t0 = detail::now_ms();
  const std::size_t k = problem.num_marginals();
  const std::size_t np = problem.num_points();
  SweepStats stats;
  if (np >= 2) {
    std::vector<double> deltas;
    for (std::size_t i = 0; i < k; ++i) {
      const PairingPlan plan = make_pairing(np, state.rng);
      detail::plan_deltas(problem, state, i, plan, deltas, threads);
      for (std::size_t c = 0; c < plan.I.size(); ++c) {
        ++stats.proposed;
        if (deltas[c] < 0.0) {
          std::swap(state.perms[i][plan.I[c]], state.perms[i][plan.J[c]]);
          state.add_cost(deltas[c]);
          ++stats.accepted;
        }
      }
    }
  }
  ++state.sweep_count;
  stats.cost_after = state.total_cost;
  stats.wall_ms = detail::now_ms() - t0;
  return stats;
}

// One ISA sweep: all N_p(N_p-1)/2 ordered pairs per marginal, applied in
// place so later pairs see earlier accepted swaps.
inline SweepStats isa_sweep(const Problem& problem, CouplingState& state) {
  const double t0 = detail::now_ms();
  const std::size_t k = problem.num_marginals();
  const std::size_t np = problem.num_points();
  SweepStats stats;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j + 1 < np; ++j)
      for (std::size_t l = j + 1; l < np; ++l) {
        ++stats.proposed;
        const double delta = swap_delta(problem, state, i, j, l);
        if (delta < 0.0) {
          std::swap(state.perms[i][j], state.perms[i][l]);
          state.add_cost(delta);
          ++stats.accepted;
        }
      }
  ++state.sweep_count;
  stats.cost_after = state.total_cost;
  stats.wall_ms = detail::now_ms() - t0;
  return stats;
}

namespace detail {

template <typename SweepFn>
std::pair<CouplingState, RunReport> solve_loop(const Problem& problem,
                                               const SolverConfig& config,
                                               SweepFn&& sweep,
                                               bool stop_on_idle_sweep) {
  const double t0 = now_ms();
  CouplingState state = init_coupling(problem, config);
  const double np = static_cast<double>(problem.num_points());
  RunReport report;
  report.seed = config.seed;
  report.trace.reserve(std::min<std::size_t>(config.max_sweeps, 1 << 16));
  std::size_t candidates = 0;
  for (std::size_t t = 1; t <= config.max_sweeps; ++t) {
    const SweepStats stats = sweep(state);
    if (t % config.recompute_interval == 0) {
      const double fresh = total_cost_recompute(problem, state);
      const double scale = std::max(std::fabs(fresh), 1e-300);
      if (std::fabs(fresh - state.total_cost) > 1e-8 * scale)
        raise(ErrorCode::NonFinite,
              "running cost drifted beyond 1e-8 of full recompute");
      state.total_cost = fresh;
      state.cost_comp = 0.0;
    }
    candidates += stats.proposed;
    report.trace.push_back(
        {state.total_cost / np, stats.accepted, candidates, stats.wall_ms});
    report.sweeps_run = t;
    // A sweep with zero proposals (N_p < 2) or, for deterministic sweeps,
    // zero accepted swaps is a fixed point.
    if (stats.proposed == 0 || (stop_on_idle_sweep && stats.accepted == 0)) {
      report.converged = true;
      break;
    }
    // Zero tolerance means "spend the full budget": a zero-improvement
    // window under random pairing does not imply stationarity.
    if (config.tolerance > 0.0 && report.trace.size() > config.window) {
      const double m0 =
          report.trace[report.trace.size() - 1 - config.window].mean_cost;
      const double m1 = report.trace.back().mean_cost;
      if ((m0 - m1) / std::max(std::fabs(m0), 1e-300) <= config.tolerance) {
        report.converged = true;
        break;
      }
    }
  }
  report.final_mean_cost = state.total_cost / np;
  report.wall_ms = now_ms() - t0;
  return {std::move(state), std::move(report)};
}

}  // namespace detail

inline std::pair<CouplingState, RunReport> collision_solve(
    const Problem& problem, const SolverConfig& config) {
  return detail::solve_loop(
      problem, config,
      [&](CouplingState& s) {
        return collision_sweep(problem, s, config.threads);
      },
      /*stop_on_idle_sweep=*/false);
}

inline std::pair<CouplingState, RunReport> isa_solve(
    const Problem& problem, const SolverConfig& config) {
  return detail::solve_loop(
      problem, config, [&](CouplingState& s) { return isa_sweep(problem, s); },
      /*stop_on_idle_sweep=*/true);
}

}  // namespace mmot
