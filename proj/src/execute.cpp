#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "moml/cli.hpp"
#include "moml/suite.hpp"

namespace moml::cli {

namespace fs = std::filesystem;

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_real(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

namespace {

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(fields[i]);
    }
    out_ << "\r\n";
    if (!out_) throw Error("write failed");
  }

 private:
  std::ofstream out_;
};

std::vector<std::string> numbered(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  for (Index i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void append(std::vector<std::string>& row, const RealVector& values) {
  for (Index i = 0; i < values.size(); ++i) row.push_back(format_real(values[i]));
}

std::string join(const RealVector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_real(v[i]);
  return out;
}

void write_report(const fs::path& path, const RunReport& report, Index m, bool timing) {
  CsvWriter csv(path);
  std::vector<std::string> header = {"t"};
  for (const auto& name : numbered("f", m)) header.push_back(name);
  for (const auto& name : numbered("gamma", m)) header.push_back(name);
  header.push_back("d_norm");
  header.push_back("wall_ms");
  csv.row(header);
  for (const auto& rec : report.records) {
    std::vector<std::string> row = {std::to_string(rec.t)};
    append(row, rec.objectives);
    append(row, rec.gamma);
    row.push_back(format_real(rec.direction_norm));
    row.push_back(timing ? format_real(rec.wall_ms) : "0");
    csv.row(row);
  }
}

void write_frontier(const fs::path& path, const PointSet& front, Index m, Index n) {
  CsvWriter csv(path);
  std::vector<std::string> header = numbered("f", m);
  for (const auto& name : numbered("alpha", n)) header.push_back(name);
  csv.row(header);
  for (std::size_t k = 0; k < front.size(); ++k) {
    std::vector<std::string> row;
    append(row, front.points[k]);
    if (front.has_tags()) append(row, front.tags[k]);
    csv.row(row);
  }
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream out;
  out << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

RealVector initial_alpha(const RunConfig& config, const BilevelProblem& problem,
                         std::uint64_t seed) {
  if (!config.alpha0.empty()) {
    RealVector alpha = Eigen::Map<const RealVector>(config.alpha0.data(),
                                                    static_cast<Index>(config.alpha0.size()));
    require_length(alpha, problem.dim_upper(), "alpha0");
    return alpha;
  }
  Rng rng = Rng(seed).split(0x616c706861);
  return suite::random_upper_point(problem, rng);
}

struct GradcheckRow {
  std::string problem;
  std::uint64_t seed;
  double max_error;
  bool passed;
};

GradcheckRow gradcheck_problem(const RunConfig& config, const std::string& id,
                               std::uint64_t seed) {
  const auto params = id == config.problem ? config.problem_params
                                           : std::map<std::string, double>{};
  const auto problem = suite::make_problem(id, params, seed);
  Rng rng = Rng(seed).split(0x67726164);
  const RealVector w0 = RealVector::Zero(problem->dim_lower());
  double worst = 0.0;
  for (int p = 0; p < config.gradcheck_points; ++p) {
    const RealVector alpha = suite::random_upper_point(*problem, rng);
    const Trajectory traj = solve_lower(*problem, alpha, w0, config.solver.inner_iterations,
                                        config.solver.lower_step);
    for (Index i = 0; i < problem->num_objectives(); ++i) {
      const RealVector reverse = reverse_hypergrad(*problem, traj, i, config.solver.hvp_mode);
      const RealVector numeric = fd_hypergrad(*problem, alpha, w0, config.solver.inner_iterations,
                                              config.solver.lower_step, i);
      worst = std::max(worst, relative_error(reverse, numeric));
    }
  }
  return {id, seed, worst, worst <= config.effective_gradcheck_tol()};
}

}  // namespace

int execute(const RunConfig& config, std::ostream& log) {
  int status = kExitOk;
  std::ostringstream summary;
  summary << "generated: " << timestamp() << "\n";
  summary << "problem: " << config.problem << "\n";
  summary << "job: " << to_string(config.job) << "\n";

  try {
    fs::create_directories(config.output_dir);
    const fs::path root(config.output_dir);

    if (config.job == JobKind::kGradcheck) {
      const std::vector<std::string> ids =
          config.problem == "all" ? suite::problem_ids() : std::vector<std::string>{config.problem};
      CsvWriter csv(root / "gradcheck.csv");
      csv.row({"problem", "seed", "hvp", "points", "max_rel_error", "tolerance", "passed"});
      const std::string hvp = config.solver.hvp_mode == HvpMode::kAuto ? "auto" : "fd";
      const double tol = config.effective_gradcheck_tol();
      for (const auto& id : ids) {
        for (std::uint64_t seed : config.seeds) {
          try {
            const GradcheckRow row = gradcheck_problem(config, id, seed);
            csv.row({row.problem, std::to_string(row.seed), hvp,
                     std::to_string(config.gradcheck_points), format_real(row.max_error),
                     format_real(tol), row.passed ? "true" : "false"});
            summary << "gradcheck " << id << " seed " << seed
                    << ": max relative error " << format_real(row.max_error)
                    << (row.passed ? " (pass)" : " (FAIL)") << "\n";
            if (!row.passed) status = kExitRuntimeError;
          } catch (const Error& e) {
            summary << "gradcheck " << id << " seed " << seed << ": error: " << e.what() << "\n";
            log << "gradcheck " << id << ": " << e.what() << "\n";
            status = kExitRuntimeError;
          }
        }
      }
    } else {
      for (std::uint64_t seed : config.seeds) {
        const fs::path dir = root / ("seed_" + std::to_string(seed));
        fs::create_directories(dir);
        try {
          const auto problem = suite::make_problem(config.problem, config.problem_params, seed);
          SolverConfig solver = config.solver;
          solver.seed = seed;
          const RealVector alpha0 = initial_alpha(config, *problem, seed);
          const Index m = problem->num_objectives();
          const auto start = std::chrono::steady_clock::now();

          if (config.job == JobKind::kFrontier) {
            const FrontierResult result = frontier_by_scalarization(
                *problem, solver, alpha0, config.resolution, config.threads);
            write_frontier(dir / "frontier.csv", result.front, m, problem->dim_upper());
            summary << "seed " << seed << ": frontier with " << result.front.size()
                    << " minimal points from " << result.weights.size() << " weights, "
                    << result.failed_runs << " failed runs\n";
            for (const auto& failure : result.failures) {
              summary << "seed " << seed << ":   failure: " << failure << "\n";
            }
          } else {
            RunReport report;
            if (config.job == JobKind::kMoml) {
              report = run_moml(*problem, solver, alpha0);
            } else {
              RealVector weights = Eigen::Map<const RealVector>(
                  config.weights.data(), static_cast<Index>(config.weights.size()));
              require_length(weights, m, "weights");
              report = run_scalarized(*problem, solver, alpha0, project_simplex(weights));
            }
            write_report(dir / "report.csv", report, m, config.record_timing);
            summary << "seed " << seed << ": termination " << to_string(report.termination)
                    << " after " << report.records.size() << " iterations\n";
            if (report.termination == Termination::kError) {
              summary << "seed " << seed << ": error: " << report.error_message << "\n";
              log << "seed " << seed << ": " << report.error_message << "\n";
              status = kExitRuntimeError;
            } else {
              summary << "seed " << seed << ": final alpha " << join(report.final_alpha) << "\n";
              summary << "seed " << seed << ": final objectives "
                      << join(report.final_objectives) << "\n";
            }
          }
          const double ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start)
                                .count();
          summary << "seed " << seed << ": wall time " << std::fixed << std::setprecision(3)
                  << ms << " ms\n"
                  << std::defaultfloat;
        } catch (const Error& e) {
          summary << "seed " << seed << ": error: " << e.what() << "\n";
          log << "seed " << seed << ": " << e.what() << "\n";
          status = kExitRuntimeError;
        }
      }
    }

    summary << "status: " << (status == kExitOk ? "ok" : "failed") << "\n";
    std::ofstream out(root / "summary.txt", std::ios::binary);
    out << summary.str();
    if (!out) throw Error("cannot write summary.txt");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return status;
}

}  // namespace moml::cli
