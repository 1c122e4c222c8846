#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moml/driver.hpp"

namespace moml::cli {

enum class JobKind { kMoml, kScalarized, kFrontier, kGradcheck };

std::string to_string(JobKind kind);

/// A validated batch job. Built by parse_config; see README for the file format.
struct RunConfig {
  std::string problem;  // suite id, or "all" for gradcheck jobs
  std::map<std::string, double> problem_params;
  JobKind job = JobKind::kMoml;
  SolverConfig solver;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "moml_out";
  /// Explicit alpha_0; drawn from the seed when empty.
  std::vector<double> alpha0;
  /// Fixed weights for scalarized jobs.
  std::vector<double> weights;
  int resolution = 11;
  int gradcheck_points = 20;
  std::optional<double> gradcheck_tol;
  /// Worker threads for frontier jobs, 0 = hardware concurrency.
  unsigned threads = 0;
  /// Fill report.csv's wall_ms column; off by default so reports are byte-reproducible.
  bool record_timing = false;

  /// 1e-5 with analytic HVPs, 1e-3 with finite-difference HVPs, unless overridden.
  double effective_gradcheck_tol() const;
};

struct ParseResult {
  std::optional<RunConfig> config;
  /// One message per offending field or line.
  std::vector<std::string> errors;

  bool ok() const { return config.has_value(); }
};

/// Parses the key = value format. Unknown keys, malformed values and missing required fields
/// are all reported; parsing never throws.
ParseResult parse_config(std::string_view text);

/// Comma-separated non-negative integers, as accepted by `seeds =` and `--seeds`.
std::optional<std::vector<std::uint64_t>> parse_seed_list(std::string_view text);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Runs the job once per seed and writes its artifacts under config.output_dir:
///   seed_<s>/report.csv     (moml, scalarized)
///   seed_<s>/frontier.csv   (frontier)
///   gradcheck.csv           (gradcheck)
///   summary.txt             (always; the only file with timestamps)
/// Returns kExitOk, or kExitRuntimeError after any job or I/O failure.
int execute(const RunConfig& config, std::ostream& log);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view text);
/// Shortest round-trip decimal form of a double.
std::string format_real(double value);

}  // namespace moml::cli
