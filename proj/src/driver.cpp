#include "moml/driver.hpp"

#include <chrono>
#include <string>

namespace moml {

void SolverConfig::validate() const {
  if (outer_iterations < 1) throw InvalidArgument("T must be >= 1");
  if (inner_iterations < 1) throw InvalidArgument("K must be >= 1");
  if (!(lower_step > 0.0)) throw InvalidArgument("mu must be > 0");
  if (!(upper_step > 0.0)) throw InvalidArgument("nu must be > 0");
  if (!(stationarity_tol >= 0.0)) throw InvalidArgument("stationarity_tol must be >= 0");
}

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::kMaxIterations:
      return "max-iterations";
    case Termination::kStationarity:
      return "stationarity";
    case Termination::kError:
      return "error";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

// Shared body of run_moml and run_scalarized; `fixed` selects the scalarized variant.
RunReport run_loop(const BilevelProblem& problem, const SolverConfig& config,
                   const RealVector& alpha0, const SimplexWeights* fixed) {
  config.validate();
  require_length(alpha0, problem.dim_upper(), problem.name() + " initial upper variable");
  require_finite(alpha0, "initial upper variable");
  const std::optional<Box> box = problem.domain_box();
  if (box) {
    box->validate();
    if (!box->contains(alpha0)) {
      throw InvalidArgument(problem.name() + ": initial upper variable outside the domain box");
    }
  }
  const Index m = problem.num_objectives();
  if (fixed && fixed->size() != m) {
    throw DimensionError("run_scalarized: weight count does not match objective count");
  }

  RealVector cold_init = config.lower_init.size() == 0
                             ? RealVector::Zero(problem.dim_lower())
                             : config.lower_init;
  require_length(cold_init, problem.dim_lower(), problem.name() + " lower initialisation");

  RunReport report;
  RealVector alpha = alpha0;
  RealVector warm = cold_init;
  int t = 0;
  try {
    for (t = 0; t < config.outer_iterations; ++t) {
      const auto start = Clock::now();
      const RealVector& w0 = config.warm_start ? warm : cold_init;
      const Trajectory traj =
          solve_lower(problem, alpha, w0, config.inner_iterations, config.lower_step);
      const HyperGradients grads = all_hypergrads(problem, traj, config.hvp_mode);

      IterationRecord rec;
      rec.t = t;
      rec.alpha = alpha;
      rec.objectives = eval_upper(problem, traj.final_state(), alpha);
      rec.exact_objectives = problem.exact_objectives(alpha);

      RealVector direction;
      if (fixed) {
        rec.gamma = fixed->values();
        direction = grads.rows.transpose() * fixed->values();
      } else {
        QpSolution qp = solve_min_norm(grads.rows, config.qp);
        rec.gamma = qp.weights.values();
        direction = std::move(qp.direction);
      }
      rec.direction_norm = direction.norm();
      require_finite(rec.direction_norm, "descent direction");

      RealVector next = alpha - config.upper_step * direction;
      if (!next.allFinite()) throw NumericError("non-finite upper update");
      if (box) next = box->clamp(next);

      warm = traj.final_state();
      rec.wall_ms =
          std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      const bool stationary = rec.direction_norm < config.stationarity_tol;
      report.records.push_back(std::move(rec));
      if (stationary) {
        report.termination = Termination::kStationarity;
        break;
      }
      alpha = std::move(next);
    }
    report.final_alpha = alpha;
    const RealVector& w0 = config.warm_start ? warm : cold_init;
    const Trajectory final_traj =
        solve_lower(problem, alpha, w0, config.inner_iterations, config.lower_step);
    report.final_objectives = eval_upper(problem, final_traj.final_state(), alpha);
  } catch (const Error& e) {
    report.termination = Termination::kError;
    report.final_alpha = alpha;
    report.error_message = "outer iteration " + std::to_string(t) + ": " + e.what();
  }
  return report;
}

}  // namespace

RunReport run_moml(const BilevelProblem& problem, const SolverConfig& config,
                   const RealVector& alpha0) {
  return run_loop(problem, config, alpha0, nullptr);
}

RunReport run_scalarized(const BilevelProblem& problem, const SolverConfig& config,
                         const RealVector& alpha0, const SimplexWeights& weights) {
  return run_loop(problem, config, alpha0, &weights);
}

}  // namespace moml
