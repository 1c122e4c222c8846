#include "moml/lower_solver.hpp"

#include <string>

namespace moml {

Trajectory solve_lower(const BilevelProblem& problem, const RealVector& alpha,
                       const RealVector& w0, int num_steps, double step_size,
                       const LowerSolveOptions& options) {
  check_dimensions(problem, w0, alpha);
  if (num_steps < 1) throw InvalidArgument("solve_lower: K must be >= 1");
  if (!(step_size > 0.0)) throw InvalidArgument("solve_lower: step size must be > 0");
  require_finite(w0, "solve_lower initial state");

  Trajectory traj;
  traj.step_size = step_size;
  traj.alpha = alpha;
  traj.states.reserve(static_cast<std::size_t>(num_steps) + 1);
  traj.states.push_back(w0);
  for (int k = 0; k < num_steps; ++k) {
    const RealVector& w = traj.states.back();
    RealVector grad = problem.lower_grad(w, alpha);
    require_length(grad, problem.dim_lower(), problem.name() + " lower_grad");
    if (!grad.allFinite()) {
      throw NumericError("solve_lower: non-finite lower gradient at iteration " +
                         std::to_string(k));
    }
    RealVector next = w - step_size * grad;
    if (!next.allFinite() || next.norm() > options.divergence_bound) {
      throw NumericError("solve_lower: diverged at iteration " + std::to_string(k + 1));
    }
    traj.states.push_back(std::move(next));
  }
  return traj;
}

double lower_residual(const BilevelProblem& problem, const Trajectory& trajectory) {
  return problem.lower_grad(trajectory.final_state(), trajectory.alpha).norm();
}

}  // namespace moml
