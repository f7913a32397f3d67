// mmot command line: sample generation, solving, oracle comparison, dataset
// pairwise distance matrices, and benchmarks. Reports are JSON, traces CSV.

#define MMOT_MEMPROBE_IMPL
#include "mmot/memprobe.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmot/mmot.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitTooLarge = 4;
constexpr int kSchemaVersion = 1;

struct SolveFlags {
  double p = 2.0;
  double pair_weight = 1.0;
  double tolerance = 0.0;
  std::size_t window = 50;
  std::size_t max_sweeps = 1000;
  std::size_t recompute = 100;
  std::uint64_t seed = 0;
  std::string init = "identity";
  unsigned threads = 1;

  mmot::SolverConfig config() const {
    mmot::SolverConfig cfg;
    cfg.tolerance = tolerance;
    cfg.window = window;
    cfg.max_sweeps = max_sweeps;
    cfg.recompute_interval = recompute;
    cfg.seed = seed;
    cfg.init = init == "random-shuffle" ? mmot::InitMode::random_shuffle
                                        : mmot::InitMode::identity;
    cfg.threads = threads;
    return cfg;
  }
};

void add_solver_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--p", f.p, "L^p exponent (>= 1)");
  cmd->add_option("--pair-weight", f.pair_weight,
                  "pairwise cost weight (1 = d^p estimator, 0.5 = half squared)");
  cmd->add_option("--tol", f.tolerance, "relative decrease tolerance");
  cmd->add_option("--window", f.window, "convergence window in sweeps");
  cmd->add_option("--max-sweeps", f.max_sweeps, "sweep budget");
  cmd->add_option("--recompute", f.recompute, "full-cost refresh period");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--init", f.init, "initial pairing: identity|random-shuffle")
      ->check(CLI::IsMember({"identity", "random-shuffle"}));
  cmd->add_option("--threads", f.threads, "delta evaluation worker threads");
}

json run_report_json(const mmot::RunReport& report, const std::string& method,
                     const mmot::Problem& problem, double p) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["method"] = method;
  j["seed"] = report.seed;
  j["np"] = problem.num_points();
  j["k"] = problem.num_marginals();
  j["n"] = problem.dim();
  j["p"] = p;
  j["mean_cost"] = report.final_mean_cost;
  j["converged"] = report.converged;
  j["sweeps"] = report.sweeps_run;
  j["wall_ms"] = report.wall_ms;
  j["alpha_hat"] = nullptr;
  j["r_squared"] = nullptr;
  std::vector<double> means;
  for (const auto& pt : report.trace) means.push_back(pt.mean_cost);
  try {
    const mmot::DecayFit fit =
        mmot::fit_exponential_decay(means, report.final_mean_cost);
    j["alpha_hat"] = fit.alpha_hat;
    j["r_squared"] = fit.r_squared;
  } catch (const mmot::Error&) {
    // too few usable points; fields stay null
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) mmot::raise(mmot::ErrorCode::IoError, "cannot write " + path);
  out << text << "\n";
}

void write_trace_csv(const mmot::RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) mmot::raise(mmot::ErrorCode::IoError, "cannot write " + path);
  out << "sweep,mean_cost,accepted,cumulative_candidates,wall_ms\n";
  char buf[64];
  for (std::size_t i = 0; i < report.trace.size(); ++i) {
    const auto& pt = report.trace[i];
    std::snprintf(buf, sizeof(buf), "%.17g", pt.mean_cost);
    out << (i + 1) << "," << buf << "," << pt.accepted << ","
        << pt.cumulative_candidates << "," << pt.wall_ms << "\n";
  }
}

// One CSV row per tuple: the K points concatenated (K*n columns).
void write_pairs_csv(const mmot::Problem& problem,
                     const mmot::CouplingState& state,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) mmot::raise(mmot::ErrorCode::IoError, "cannot write " + path);
  char buf[64];
  for (std::size_t r = 0; r < problem.num_points(); ++r) {
    bool first = true;
    for (std::size_t i = 0; i < problem.num_marginals(); ++i) {
      const double* pt = problem.marginals[i].point(state.perms[i][r]);
      for (std::size_t d = 0; d < problem.marginals[i].dim; ++d) {
        std::snprintf(buf, sizeof(buf), "%.17g", pt[d]);
        out << (first ? "" : ",") << buf;
        first = false;
      }
    }
    out << "\n";
  }
}

int cmd_gen(const std::string& family, std::size_t np, std::size_t dim,
            std::uint64_t seed, const std::string& out) {
  mmot::SyntheticSpec spec;
  spec.family = mmot::family_from_string(family);
  spec.num_points = np;
  spec.dim = dim;
  spec.seed = seed;
  mmot::save_csv(mmot::sample_synthetic(spec), out);
  return 0;
}

int cmd_solve(const std::vector<std::string>& inputs,
              const std::string& method, const SolveFlags& flags,
              const std::string& out_report, const std::string& out_trace,
              const std::string& out_pairs) {
  std::vector<mmot::MarginalSamples> marginals;
  for (const auto& path : inputs) marginals.push_back(mmot::load_csv(path));
  mmot::Problem problem = mmot::new_problem(
      std::move(marginals), mmot::PairwiseLp{flags.p, flags.pair_weight});
  const mmot::SolverConfig cfg = flags.config();
  auto [state, report] = method == "isa" ? mmot::isa_solve(problem, cfg)
                                         : mmot::collision_solve(problem, cfg);
  if (!mmot::check_marginal_preservation(problem, state))
    mmot::raise(mmot::ErrorCode::NonFinite, "marginal preservation violated");
  write_text(out_report, run_report_json(report, method, problem, flags.p).dump(2));
  if (!out_trace.empty()) write_trace_csv(report, out_trace);
  if (!out_pairs.empty()) write_pairs_csv(problem, state, out_pairs);
  return 0;
}

int cmd_compare(const std::string& in1, const std::string& in2,
                const std::string& methods_csv, const SolveFlags& flags,
                double lambda, const std::string& out_report) {
  const mmot::MarginalSamples x1 = mmot::load_csv(in1);
  const mmot::MarginalSamples x2 = mmot::load_csv(in2);
  const mmot::PairwiseLp cost{flags.p, flags.pair_weight};

  std::vector<std::string> methods;
  std::stringstream ss(methods_csv);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) methods.push_back(tok);

  json per_method = json::object();
  double best_exact = -1.0;
  auto now_ms = [] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
  for (const auto& m : methods) {
    json entry;
    const double t0 = now_ms();
    if (m == "collision" || m == "isa") {
      mmot::Problem problem = mmot::new_problem({x1, x2}, cost);
      const mmot::SolverConfig cfg = flags.config();
      auto [state, report] = m == "isa" ? mmot::isa_solve(problem, cfg)
                                        : mmot::collision_solve(problem, cfg);
      entry["mean_cost"] = report.final_mean_cost;
      entry["sweeps"] = report.sweeps_run;
      entry["converged"] = report.converged;
    } else if (m == "hungarian") {
      const mmot::AssignmentResult r = mmot::exact_assignment_2m(x1, x2, cost);
      entry["mean_cost"] = r.mean_cost;
      best_exact = best_exact < 0 ? r.mean_cost
                                  : std::min(best_exact, r.mean_cost);
    } else if (m == "sinkhorn") {
      const mmot::SinkhornResult r = mmot::sinkhorn_2m(x1, x2, lambda, 10000,
                                                       1e-9, cost);
      entry["mean_cost"] = r.reg_cost;
      entry["iterations"] = r.iterations;
      entry["converged"] = r.converged;
      entry["lambda"] = lambda;
    } else {
      mmot::raise(mmot::ErrorCode::UnknownFamily, "unknown method '" + m + "'");
    }
    entry["wall_ms"] = now_ms() - t0;
    per_method[m] = entry;
  }
  // Relative error against the best exact method present; falls back to
  // absolute error when the reference is zero.
  if (best_exact >= 0.0) {
    for (auto& [name, entry] : per_method.items()) {
      const double c = entry["mean_cost"].get<double>();
      entry["relative_error"] =
          best_exact > 0.0 ? (c - best_exact) / best_exact : std::fabs(c);
    }
  }
  json out;
  out["schema_version"] = kSchemaVersion;
  out["np"] = x1.num_points;
  out["n"] = x1.dim;
  out["p"] = flags.p;
  out["seed"] = flags.seed;
  out["reference_mean_cost"] = best_exact >= 0.0 ? json(best_exact) : json();
  out["methods"] = per_method;
  write_text(out_report, out.dump(2));
  return 0;
}

int cmd_pairwise(const std::string& dir, std::size_t np,
                 const std::string& mode, const std::string& image_mode,
                 const SolveFlags& flags, const std::string& out_matrix,
                 const std::string& out_nn) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.size() < 2)
    mmot::raise(mmot::ErrorCode::MismatchedCounts,
                "need at least 2 .pgm files in " + dir);

  std::vector<mmot::MarginalSamples> marginals;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const mmot::GrayImage img = mmot::load_pgm(files[i].string());
    const mmot::ImageMode im = image_mode == "grid"
                                   ? mmot::ImageMode::grid
                                   : mmot::ImageMode::intensity_sampled;
    const std::size_t n = im == mmot::ImageMode::grid
                              ? img.width * img.height
                              : np;
    marginals.push_back(
        mmot::image_to_samples(img, n, im, flags.seed + i));
    marginals.back().id = files[i].filename().string();
  }

  const mmot::PairwiseMode pm = mode == "pairwise2"
                                    ? mmot::PairwiseMode::pairwise2
                                    : mmot::PairwiseMode::mmot;
  std::vector<std::string> names;
  for (const auto& m : marginals) names.push_back(m.id);
  const mmot::PairwiseResult res = mmot::pairwise_distances(
      std::move(marginals), pm, flags.p, flags.config());

  if (!out_matrix.empty()) {
    std::ofstream out(out_matrix);
    if (!out) mmot::raise(mmot::ErrorCode::IoError, "cannot write " + out_matrix);
    char buf[64];
    for (std::size_t i = 0; i < res.k; ++i) {
      for (std::size_t j = 0; j < res.k; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", res.matrix[i * res.k + j]);
        out << (j ? "," : "") << buf;
      }
      out << "\n";
    }
  }
  json nn;
  nn["schema_version"] = kSchemaVersion;
  nn["from_mmot"] = res.from_mmot;
  nn["files"] = names;
  nn["ms_per_sweep"] = res.ms_per_sweep;
  nn["sweeps"] = res.report.sweeps_run;
  nn["seed"] = flags.seed;
  json lists = json::array();
  for (const auto& order : res.nearest) lists.push_back(order);
  nn["nearest"] = lists;
  write_text(out_nn, nn.dump(2));
  return 0;
}

int cmd_bench(const std::string& scenario, const std::string& method,
              const std::string& family, std::vector<std::size_t> sizes,
              std::size_t sweeps, std::size_t np, std::uint64_t seed,
              const std::string& out_report) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["scenario"] = scenario;
  out["seed"] = seed;
  if (scenario == "scaling") {
    mmot::SyntheticSpec tmpl;
    tmpl.family = mmot::family_from_string(family);
    tmpl.dim = 2;
    tmpl.seed = seed;
    const mmot::SweepMethod sm = method == "isa" ? mmot::SweepMethod::isa
                                                 : mmot::SweepMethod::collision;
    const auto pts = mmot::measure_sweep_scaling(tmpl, sizes, sweeps, sm);
    json arr = json::array();
    for (const auto& pt : pts)
      arr.push_back({{"np", pt.num_points}, {"ms_per_sweep", pt.ms_per_sweep}});
    out["method"] = method;
    out["points"] = arr;
  } else if (scenario == "memory") {
    mmot::SyntheticSpec a{mmot::Family::normal, np, 2, seed};
    mmot::SyntheticSpec b{mmot::Family::normal, np, 2, seed + 1};
    mmot::Problem problem = mmot::new_problem(
        {mmot::sample_synthetic(a), mmot::sample_synthetic(b)},
        mmot::PairwiseLp{2.0, 1.0});
    mmot::SolverConfig cfg;
    cfg.seed = seed;
    cfg.max_sweeps = sweeps;
    mmot::memprobe::reset_peak();
    const std::size_t before = mmot::memprobe::current();
    auto [state, report] = mmot::collision_solve(problem, cfg);
    const std::size_t peak = mmot::memprobe::peak();
    out["np"] = np;
    out["sweeps"] = report.sweeps_run;
    out["peak_additional_bytes"] = peak > before ? peak - before : 0;
    out["budget_bytes"] = 64 * np;
    out["mean_cost"] = report.final_mean_cost;
  } else {
    mmot::raise(mmot::ErrorCode::UnknownFamily,
                "unknown bench scenario '" + scenario + "'");
  }
  write_text(out_report, out.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-marginal optimal transport via collision-based swapping"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate synthetic samples as CSV");
  std::string gen_family = "normal", gen_out;
  std::size_t gen_np = 1000, gen_dim = 2;
  std::uint64_t gen_seed = 0;
  gen->add_option("--family", gen_family,
                  "normal|uniform|swiss_roll|banana|funnel|ring")->required();
  gen->add_option("--np", gen_np, "number of samples")->required();
  gen->add_option("--n", gen_dim, "dimension (normal/uniform only)");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "solve an MMOT problem from CSVs");
  std::vector<std::string> solve_inputs;
  std::string solve_method = "collision";
  std::string solve_report = "-", solve_trace, solve_pairs;
  SolveFlags solve_flags;
  solve->add_option("inputs", solve_inputs, "CSV sample files (>= 2)")
      ->required()->expected(-2);
  solve->add_option("--method", solve_method, "collision|isa")
      ->check(CLI::IsMember({"collision", "isa"}));
  add_solver_flags(solve, solve_flags);
  solve->add_option("--out-report", solve_report, "report JSON path (- = stdout)");
  solve->add_option("--out-trace", solve_trace, "trace CSV path");
  solve->add_option("--out-pairs", solve_pairs, "paired samples CSV path");

  // compare
  auto* compare = app.add_subcommand("compare",
                                     "compare solvers and oracles on a pair");
  std::string cmp_in1, cmp_in2, cmp_methods = "collision,isa,hungarian,sinkhorn";
  std::string cmp_report = "-";
  double cmp_lambda = 1.0;
  SolveFlags cmp_flags;
  compare->add_option("input1", cmp_in1, "first CSV")->required();
  compare->add_option("input2", cmp_in2, "second CSV")->required();
  compare->add_option("--methods", cmp_methods,
                      "comma list of collision,isa,hungarian,sinkhorn");
  add_solver_flags(compare, cmp_flags);
  compare->add_option("--lambda", cmp_lambda, "Sinkhorn regularization");
  compare->add_option("--out-report", cmp_report, "report JSON path (- = stdout)");

  // pairwise
  auto* pairwise = app.add_subcommand(
      "pairwise", "pairwise distance matrix over a directory of PGM images");
  std::string pw_dir, pw_mode = "mmot", pw_image_mode = "intensity_sampled";
  std::string pw_matrix, pw_nn = "-";
  std::size_t pw_np = 1000;
  SolveFlags pw_flags;
  pairwise->add_option("--dir", pw_dir, "directory of .pgm files")->required();
  pairwise->add_option("--np", pw_np, "samples per image (intensity mode)");
  pairwise->add_option("--mode", pw_mode, "mmot|pairwise2")
      ->check(CLI::IsMember({"mmot", "pairwise2"}));
  pairwise->add_option("--image-mode", pw_image_mode, "grid|intensity_sampled")
      ->check(CLI::IsMember({"grid", "intensity_sampled"}));
  add_solver_flags(pairwise, pw_flags);
  pairwise->add_option("--out-matrix", pw_matrix, "distance matrix CSV path");
  pairwise->add_option("--out-nn", pw_nn, "nearest-neighbour JSON path");

  // bench
  auto* bench = app.add_subcommand("bench", "timing and memory benchmarks");
  std::string bn_scenario, bn_method = "collision", bn_family = "normal";
  std::string bn_report = "-";
  std::vector<std::size_t> bn_sizes;
  std::size_t bn_sweeps = 10, bn_np = 100000;
  std::uint64_t bn_seed = 0;
  bench->add_option("--scenario", bn_scenario, "scaling|memory")->required();
  bench->add_option("--method", bn_method, "collision|isa");
  bench->add_option("--family", bn_family, "synthetic family for scaling");
  bench->add_option("--sizes", bn_sizes, "N_p values for scaling");
  bench->add_option("--sweeps", bn_sweeps, "sweeps per measurement");
  bench->add_option("--np", bn_np, "N_p for the memory scenario");
  bench->add_option("--seed", bn_seed, "RNG seed");
  bench->add_option("--out-report", bn_report, "report JSON path (- = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_family, gen_np, gen_dim, gen_seed, gen_out);
    if (solve->parsed())
      return cmd_solve(solve_inputs, solve_method, solve_flags, solve_report,
                       solve_trace, solve_pairs);
    if (compare->parsed())
      return cmd_compare(cmp_in1, cmp_in2, cmp_methods, cmp_flags, cmp_lambda,
                         cmp_report);
    if (pairwise->parsed())
      return cmd_pairwise(pw_dir, pw_np, pw_mode, pw_image_mode, pw_flags,
                          pw_matrix, pw_nn);
    if (bench->parsed())
      return cmd_bench(bn_scenario, bn_method, bn_family, bn_sizes, bn_sweeps,
                       bn_np, bn_seed, bn_report);
  } catch (const mmot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == mmot::ErrorCode::TooLarge ? kExitTooLarge : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
