// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if
// any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgda_oracles.hpp"
#include "moml/cli.hpp"
#include "moml/driver.hpp"
#include "moml/pareto.hpp"
#include "moml/suite.hpp"
#include "pareto_oracles.hpp"

using namespace moml;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Options {
  std::string cli;
  std::string configs;
  std::string workdir = "acceptance_runs";
};

std::string fmt(double x) { return cli::format_real(x); }

SolverConfig solver(int T, int K, double mu, double nu, double tol = 0.0) {
  SolverConfig c;
  c.outer_iterations = T;
  c.inner_iterations = K;
  c.lower_step = mu;
  c.upper_step = nu;
  c.stationarity_tol = tol;
  return c;
}

// 1. Min-norm QP against the simplex grid and the two-gradient closed form.
Outcome mgda_qp() {
  Rng rng(1001);
  double worst_grid = -1e300;
  double worst_closed = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 2 + trial % 2;
    const Index dim = 1 + static_cast<Index>(rng.uniform() * 10);
    const RealMatrix g = rng.normal_matrix(m, dim);
    const QpSolution qp = solve_min_norm(g);
    worst_grid = std::max(worst_grid, qp.objective_value - testing::brute_force_min_norm(g));
    if (m == 2) {
      worst_closed = std::max(
          worst_closed, std::abs(qp.objective_value -
                                 testing::closed_form_two(g.row(0).transpose(), g.row(1).transpose())));
    }
  }
  return {worst_grid <= 1e-6 && worst_closed <= 1e-8,
          "max(fista - grid) " + fmt(worst_grid) + ", max |fista - closed form| " +
              fmt(worst_closed)};
}

// 2. Reverse-mode hypergradients against central differences of the unrolled map.
Outcome hypergradients() {
  Outcome out;
  std::ostringstream detail;
  for (HvpMode mode : {HvpMode::kAuto, HvpMode::kFiniteDifference}) {
    const double tol = mode == HvpMode::kAuto ? 1e-5 : 1e-3;
    detail << (mode == HvpMode::kAuto ? "analytic" : "fd") << ":";
    for (const auto& id : suite::problem_ids()) {
      const auto problem = suite::make_problem(id, {}, 42);
      Rng rng(Rng(42).split(0x67726164));
      const RealVector w0 = RealVector::Zero(problem->dim_lower());
      double worst = 0.0;
      for (int p = 0; p < 20; ++p) {
        const RealVector alpha = suite::random_upper_point(*problem, rng);
        const Trajectory traj = solve_lower(*problem, alpha, w0, 10, 0.1);
        for (Index i = 0; i < problem->num_objectives(); ++i) {
          worst = std::max(worst, relative_error(reverse_hypergrad(*problem, traj, i, mode),
                                                 fd_hypergrad(*problem, alpha, w0, 10, 0.1, i)));
        }
      }
      out.passed = out.passed && worst <= tol;
      detail << " " << id << "=" << fmt(worst);
    }
    detail << (mode == HvpMode::kAuto ? "; " : "");
  }
  out.detail = detail.str();
  return out;
}

// 3. Contraction of the lower iterates on QB2 with mu = 1/L_f.
Outcome lower_contraction() {
  const auto spec = suite::qb2_spec();
  const suite::QuadraticBilevel problem(spec);
  const Eigen::SelfAdjointEigenSolver<RealMatrix> eig(spec.A);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const double mu = 1.0 / lmax;
  const double bound = (1.0 - mu * lmin) + 1e-10;
  Rng rng(3);
  double worst = 0.0;
  int ratios = 0;
  const auto measure = [&](const RealVector& alpha, const RealVector& w0, int K) {
    const RealVector star = suite::qb_analytic_lower_opt(spec, alpha);
    const Trajectory traj = solve_lower(problem, alpha, w0, K, mu);
    for (int k = 0; k < K; ++k) {
      const double before = (traj.states[static_cast<std::size_t>(k)] - star).norm();
      const double after = (traj.states[static_cast<std::size_t>(k) + 1] - star).norm();
      worst = std::max(worst, after / before);
      ++ratios;
    }
  };
  // Random alphas: start far enough away that ||w_k - w*|| stays well above rounding level.
  for (int trial = 0; trial < 20; ++trial) {
    measure(rng.uniform_vector(2, -1, 1), 10.0 * rng.normal_vector(2), 10);
  }
  // alpha = 0 puts w* exactly at the origin, so the error is exact for many more steps.
  measure(RealVector::Zero(2), rng.normal_vector(2), 60);
  return {worst <= bound, "max ratio " + fmt(worst) + " over " + std::to_string(ratios) +
                              " steps, bound " + fmt(bound)};
}

// 4. MOML from random starts ends on the analytic Pareto segment, Pareto-stationary.
Outcome pareto_recovery() {
  const auto spec = suite::qb2_spec();
  const suite::QuadraticBilevel problem(spec);
  const SolverConfig c = solver(5000, 30, 0.1, 0.1, 1e-6);
  Rng rng(404);
  double worst_distance = 0.0;
  double worst_d = 0.0;
  bool stationary = true;
  for (int run = 0; run < 10; ++run) {
    const RealVector alpha0 = rng.uniform_vector(2, -2, 2);
    const RunReport report = run_moml(problem, c, alpha0);
    stationary = stationary && report.termination == Termination::kStationarity;
    worst_distance = std::max(worst_distance, suite::qb_pareto_distance(spec, report.final_alpha));
    worst_d = std::max(worst_d, report.records.back().direction_norm);
  }
  return {stationary && worst_distance <= 1e-3 && worst_d <= 1e-6,
          "max distance " + fmt(worst_distance) + ", max final ||d|| " + fmt(worst_d)};
}

// 5. Scalarization frontier approaches the analytic frontier as K grows.
Outcome frontier_convergence() {
  const auto spec = suite::qb2_spec();
  const suite::QuadraticBilevel problem(spec);
  const PointSet analytic = suite::qb_analytic_front(spec, 2001);
  PointSet analytic_alphas;
  for (const auto& tag : analytic.tags) analytic_alphas.add(tag);

  std::vector<double> objective_space;
  std::ostringstream detail;
  for (int K : {1, 2, 4, 8, 16, 32, 64}) {
    const FrontierResult result = frontier_by_scalarization(
        problem, solver(3000, K, 0.1, 1.0, 1e-11), RealVector::Zero(2), 51);
    PointSet alphas;
    for (const auto& tag : result.front.tags) alphas.add(tag);
    objective_space.push_back(hausdorff(result.front, analytic));
    detail << "K=" << K << ": " << fmt(objective_space.back()) << " (alpha "
           << fmt(hausdorff(alphas, analytic_alphas)) << ") ";
  }
  bool monotone = true;
  for (std::size_t j = 1; j < objective_space.size(); ++j) {
    monotone = monotone && objective_space[j] <= 1.1 * objective_space[j - 1];
  }
  return {monotone && objective_space.back() <= 1e-2, detail.str()};
}

// 6. Soft parameter count against the argmax count at a logit margin of at least 10.
Outcome soft_count() {
  Rng rng(66);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    suite::ArchSizeSpec spec;
    spec.num_edges = 1 + static_cast<Index>(rng.uniform() * 14);
    const Index ops = 2 + static_cast<Index>(rng.uniform() * 7);
    for (Index o = 0; o < ops; ++o) spec.op_params.push_back(std::floor(rng.uniform(10, 200)));
    spec.target = 1.0;
    RealMatrix logits = 3.0 * rng.normal_matrix(spec.num_edges, ops);
    for (Index e = 0; e < spec.num_edges; ++e) {
      Index win = 0;
      logits.row(e).maxCoeff(&win);
      double runner_up = -1e300;
      for (Index o = 0; o < ops; ++o) {
        if (o != win) runner_up = std::max(runner_up, logits(e, o));
      }
      logits(e, win) = std::max(logits(e, win), runner_up + 10.0);
    }
    const double hard = suite::hard_param_count(spec, logits);
    worst = std::max(worst, std::abs(suite::soft_param_count(spec, logits) - hard) / hard);
  }
  return {worst <= 1e-2, "max relative gap " + fmt(worst) + " over 1000 specs"};
}

// 7. MOML versus equal weights on synthetic multi-task regression.
Outcome mtl_non_domination() {
  const int K = 20;
  const double mu = 0.1;
  int not_dominated = 0;
  int strictly_better = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto problem = suite::make_problem("mtl_toy", {}, seed);
    const RealVector ones = RealVector::Ones(problem->dim_upper());
    // Equal weights: alpha fixed at one, same lower budget.
    const Trajectory ew = solve_lower(*problem, ones, RealVector::Zero(problem->dim_lower()), K, mu);
    const ObjectiveVector ew_val = eval_upper(*problem, ew.final_state(), ones);

    Rng rng = Rng(seed).split(0x616c706861);
    const RealVector alpha0 = suite::random_upper_point(*problem, rng);
    const RunReport report = run_moml(*problem, solver(200, K, mu, 0.5), alpha0);
    if (report.termination == Termination::kError) continue;
    if (!dominates(ew_val, report.final_objectives)) ++not_dominated;
    if (dominates(report.final_objectives, ew_val)) ++strictly_better;
  }
  return {not_dominated >= 16, std::to_string(not_dominated) + "/20 not dominated by EW, " +
                                   std::to_string(strictly_better) + "/20 dominate EW"};
}

// 8. Order-theoretic properties of dominance and minimal points.
Outcome order_properties() {
  Rng rng(808);
  bool ok = true;
  for (int trial = 0; trial < 10000; ++trial) {
    const Index m = 2 + trial % 3;
    const auto draw = [&] { return RealVector((rng.uniform_vector(m, 0, 1) * 4).array().floor()); };
    const RealVector a = draw(), b = draw(), c = draw();
    ok = ok && !dominates(a, a);
    if (dominates(a, b)) ok = ok && !dominates(b, a);
    if (dominates(a, b) && dominates(b, c)) ok = ok && dominates(a, c);
  }
  int sets = 0;
  for (std::size_t n : {1, 2, 10, 100, 500, 1000}) {
    for (Index m : {2, 3}) {
      for (bool coarse : {false, true}) {
        PointSet set;
        for (std::size_t k = 0; k < n; ++k) {
          RealVector p = rng.uniform_vector(m, 0, 1);
          if (coarse) p = (p * 6).array().floor().matrix();
          set.add(p);
        }
        const PointSet front = minimal_points(set);
        const auto expected = testing::brute_minimal(set.points);
        ok = ok && front.size() == expected.size();
        for (std::size_t k = 0; ok && k < expected.size(); ++k) {
          ok = front.points[k] == set.points[expected[k]];
        }
        const PointSet again = minimal_points(front);
        ok = ok && again.points == front.points;
        ++sets;
      }
    }
  }
  return {ok, "10000 triples, " + std::to_string(sets) + " sets up to 1000 points"};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// 9. Two CLI executions of every acceptance config produce byte-identical CSVs.
Outcome determinism(const Options& options) {
  if (options.cli.empty() || options.configs.empty()) return {false, "--cli and --configs required"};
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(options.configs)) {
    if (entry.path().extension() == ".cfg") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) return {false, "no configs in " + options.configs};

  const fs::path root = fs::absolute(options.workdir);
  int files = 0;
  for (const auto& config : configs) {
    const std::string stem = config.stem().string();
    for (const char* pass : {"a", "b"}) {
      const fs::path out = root / pass / stem;
      fs::remove_all(out);
      const std::string command = "\"" + options.cli + "\" run \"" + config.string() +
                                  "\" --out \"" + out.string() + "\"";
      if (std::system(command.c_str()) != 0) return {false, "CLI failed on " + stem};
    }
    for (const auto& entry : fs::recursive_directory_iterator(root / "a" / stem)) {
      if (entry.path().extension() != ".csv") continue;
      const fs::path twin = root / "b" / stem / fs::relative(entry.path(), root / "a" / stem);
      if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) {
        return {false, "differs: " + fs::relative(entry.path(), root).string()};
      }
      ++files;
    }
  }
  return {files > 0, std::to_string(files) + " CSV files identical across " +
                         std::to_string(configs.size()) + " configs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moml acceptance suite"};
  Options options;
  app.add_option("--cli", options.cli, "Path to the moml executable");
  app.add_option("--configs", options.configs, "Directory of acceptance configs");
  app.add_option("--workdir", options.workdir, "Scratch directory for CLI runs");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"mgda-qp", 2, mgda_qp},
      {"hypergradient", 10, hypergradients},
      {"lower-contraction", 0, lower_contraction},
      {"pareto-recovery", 30, pareto_recovery},
      {"frontier-convergence", 120, frontier_convergence},
      {"soft-count", 0, soft_count},
      {"mtl-non-domination", 60, mtl_non_domination},
      {"order-properties", 0, order_properties},
      {"determinism", 0, [&] { return determinism(options); }},
  };

  int failures = 0;
  int index = 1;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criterion.budget_s > 0 && seconds > criterion.budget_s) {
      outcome.passed = false;
      outcome.detail += " [over time budget]";
    }
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.2fs", seconds);
    std::cout << (outcome.passed ? "PASS" : "FAIL") << " [" << index++ << "] " << criterion.name
              << " (" << timing << "): " << outcome.detail << std::endl;
    if (!outcome.passed) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
