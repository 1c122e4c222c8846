#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "moml/cli.hpp"
#include "moml/suite.hpp"

namespace moml::cli {

std::string to_string(JobKind kind) {
  switch (kind) {
    case JobKind::kMoml:
      return "moml";
    case JobKind::kScalarized:
      return "scalarized";
    case JobKind::kFrontier:
      return "frontier";
    case JobKind::kGradcheck:
      return "gradcheck";
  }
  return "unknown";
}

double RunConfig::effective_gradcheck_tol() const {
  if (gradcheck_tol) return *gradcheck_tol;
  return solver.hvp_mode == HvpMode::kAuto ? 1e-5 : 1e-3;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_real(std::string_view s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long long> to_integer(std::string_view s) {
  long long value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<std::vector<double>> to_real_list(std::string_view s) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    const auto value = to_real(item);
    if (!value) return std::nullopt;
    out.push_back(*value);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

const std::set<std::string_view> kSolverKeys = {
    "problem",    "job",        "T",          "K",           "mu",
    "nu",         "warm_start", "stationarity_tol", "seed",   "seeds",
    "out",        "alpha0",     "weights",    "resolution",  "gradcheck_points",
    "gradcheck_tol", "hvp",     "qp_tol",     "qp_max_iter", "threads",
    "record_timing",
};

const std::set<std::string_view> kSections = {"", "run", "solver", "job", "params"};

}  // namespace

std::optional<std::vector<std::uint64_t>> parse_seed_list(std::string_view s) {
  std::vector<std::uint64_t> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    const auto value = to_integer(item);
    if (!value || *value < 0) return std::nullopt;
    out.push_back(static_cast<std::uint64_t>(*value));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

ParseResult parse_config(std::string_view text) {
  ParseResult result;
  auto& errors = result.errors;
  std::map<std::string, std::string> values;
  std::map<std::string, std::string> params;
  std::string section;

  std::istringstream stream{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "malformed section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!kSections.count(section)) errors.push_back(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      errors.push_back(where + "empty key");
      continue;
    }
    auto& target = section == "params" ? params : values;
    if (section != "params" && !kSolverKeys.count(key)) {
      errors.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (target.count(key)) {
      errors.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    target[key] = value;
  }

  RunConfig cfg;
  auto has = [&](const char* key) { return values.count(key) > 0; };

  auto read_int = [&](const char* key, auto& out) {
    if (!has(key)) return false;
    const auto value = to_integer(values[key]);
    if (!value) {
      errors.push_back(std::string(key) + ": expected an integer, got '" + values[key] + "'");
      return false;
    }
    out = static_cast<std::remove_reference_t<decltype(out)>>(*value);
    return true;
  };
  auto read_real = [&](const char* key, double& out) {
    if (!has(key)) return false;
    const auto value = to_real(values[key]);
    if (!value) {
      errors.push_back(std::string(key) + ": expected a finite number, got '" + values[key] + "'");
      return false;
    }
    out = *value;
    return true;
  };
  auto read_bool = [&](const char* key, bool& out) {
    if (!has(key)) return;
    const std::string& v = values[key];
    if (v == "true" || v == "1" || v == "yes") {
      out = true;
    } else if (v == "false" || v == "0" || v == "no") {
      out = false;
    } else {
      errors.push_back(std::string(key) + ": expected true or false, got '" + v + "'");
    }
  };
  auto require = [&](const char* key) {
    if (!has(key)) errors.push_back(std::string("missing required field '") + key + "'");
  };

  // problem / job
  require("problem");
  require("job");
  if (has("job")) {
    const std::string& job = values["job"];
    if (job == "moml") {
      cfg.job = JobKind::kMoml;
    } else if (job == "scalarized") {
      cfg.job = JobKind::kScalarized;
    } else if (job == "frontier") {
      cfg.job = JobKind::kFrontier;
    } else if (job == "gradcheck") {
      cfg.job = JobKind::kGradcheck;
    } else {
      errors.push_back("job: unknown job kind '" + job +
                       "' (expected moml, scalarized, frontier or gradcheck)");
    }
  }
  if (has("problem")) {
    cfg.problem = values["problem"];
    const bool all_ok = cfg.problem == "all" && cfg.job == JobKind::kGradcheck;
    if (!all_ok && !suite::is_known_problem(cfg.problem)) {
      std::string known;
      for (const auto& id : suite::problem_ids()) known += (known.empty() ? "" : ", ") + id;
      errors.push_back("problem: unknown problem id '" + cfg.problem + "' (known: " + known +
                       (cfg.job == JobKind::kGradcheck ? ", all" : "") + ")");
    }
  }

  // solver
  const bool gradcheck = cfg.job == JobKind::kGradcheck;
  require("K");
  require("mu");
  if (!gradcheck) {
    require("T");
    require("nu");
  }
  if (read_int("T", cfg.solver.outer_iterations) && cfg.solver.outer_iterations < 1) {
    errors.push_back("T must be ≥ 1");
  }
  if (read_int("K", cfg.solver.inner_iterations) && cfg.solver.inner_iterations < 1) {
    errors.push_back("K must be ≥ 1");
  }
  if (read_real("mu", cfg.solver.lower_step) && !(cfg.solver.lower_step > 0.0)) {
    errors.push_back("mu must be > 0");
  }
  if (read_real("nu", cfg.solver.upper_step) && !(cfg.solver.upper_step > 0.0)) {
    errors.push_back("nu must be > 0");
  }
  if (read_real("stationarity_tol", cfg.solver.stationarity_tol) &&
      cfg.solver.stationarity_tol < 0.0) {
    errors.push_back("stationarity_tol must be ≥ 0");
  }
  read_bool("warm_start", cfg.solver.warm_start);
  if (read_real("qp_tol", cfg.solver.qp.tol) && cfg.solver.qp.tol < 0.0) {
    errors.push_back("qp_tol must be ≥ 0");
  }
  if (read_int("qp_max_iter", cfg.solver.qp.max_iter) && cfg.solver.qp.max_iter < 1) {
    errors.push_back("qp_max_iter must be ≥ 1");
  }
  if (has("hvp")) {
    const std::string& mode = values["hvp"];
    if (mode == "auto") {
      cfg.solver.hvp_mode = HvpMode::kAuto;
    } else if (mode == "fd") {
      cfg.solver.hvp_mode = HvpMode::kFiniteDifference;
    } else {
      errors.push_back("hvp: expected auto or fd, got '" + mode + "'");
    }
  }

  // seeds
  if (has("seed") && has("seeds")) errors.push_back("give either seed or seeds, not both");
  if (!has("seed") && !has("seeds")) errors.push_back("missing required field 'seed'");
  for (const char* key : {"seed", "seeds"}) {
    if (!has(key)) continue;
    if (auto seeds = parse_seed_list(values[key])) {
      cfg.seeds = std::move(*seeds);
    } else {
      errors.push_back(std::string(key) + ": expected non-negative integers, got '" +
                       values[key] + "'");
    }
  }
  if (!cfg.seeds.empty()) cfg.solver.seed = cfg.seeds.front();

  // job options
  if (has("out")) cfg.output_dir = values["out"];
  if (has("alpha0")) {
    if (auto list = to_real_list(values["alpha0"])) {
      cfg.alpha0 = std::move(*list);
    } else {
      errors.push_back("alpha0: expected a comma-separated list of numbers");
    }
  }
  if (cfg.job == JobKind::kScalarized) require("weights");
  if (has("weights")) {
    if (auto list = to_real_list(values["weights"])) {
      cfg.weights = std::move(*list);
      double sum = 0.0;
      bool negative = false;
      for (double w : cfg.weights) sum += w, negative |= w < 0.0;
      if (negative || std::abs(sum - 1.0) > 1e-9) {
        errors.push_back("weights must be nonnegative and sum to 1");
      }
    } else {
      errors.push_back("weights: expected a comma-separated list of numbers");
    }
  }
  if (read_int("resolution", cfg.resolution) && cfg.resolution < 2) {
    errors.push_back("resolution must be ≥ 2");
  }
  if (read_int("gradcheck_points", cfg.gradcheck_points) && cfg.gradcheck_points < 1) {
    errors.push_back("gradcheck_points must be ≥ 1");
  }
  double tol = 0.0;
  if (read_real("gradcheck_tol", tol)) {
    if (tol <= 0.0) errors.push_back("gradcheck_tol must be > 0");
    cfg.gradcheck_tol = tol;
  }
  long long threads = 0;
  if (read_int("threads", threads)) {
    if (threads < 0) errors.push_back("threads must be ≥ 0");
    cfg.threads = static_cast<unsigned>(std::max(0LL, threads));
  }
  read_bool("record_timing", cfg.record_timing);

  // problem parameters
  if (!params.empty() && cfg.problem == "all") {
    errors.push_back("[params] cannot be combined with problem = all");
  } else if (suite::is_known_problem(cfg.problem)) {
    const auto& infos = suite::problem_parameters(cfg.problem);
    for (const auto& [key, text_value] : params) {
      const bool known = std::any_of(infos.begin(), infos.end(),
                                     [&](const auto& info) { return info.name == key; });
      if (!known) {
        errors.push_back("params: problem " + cfg.problem + " has no parameter '" + key + "'");
        continue;
      }
      if (auto value = to_real(text_value)) {
        cfg.problem_params[key] = *value;
      } else {
        errors.push_back("params." + key + ": expected a finite number, got '" + text_value + "'");
      }
    }
  }

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

}  // namespace moml::cli
