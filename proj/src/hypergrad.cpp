#include "moml/hypergrad.hpp"

#include <cmath>
#include <string>

namespace moml {

namespace {

void check_objective(const BilevelProblem& problem, Index objective) {
  if (objective < 0 || objective >= problem.num_objectives()) {
    throw InvalidArgument("objective index " + std::to_string(objective) + " out of range for " +
                          problem.name());
  }
}

}  // namespace

RealVector reverse_hypergrad(const BilevelProblem& problem, const Trajectory& trajectory,
                             Index objective, HvpMode mode) {
  check_objective(problem, objective);
  if (trajectory.states.empty()) throw InvalidArgument("reverse_hypergrad: empty trajectory");
  const RealVector& alpha = trajectory.alpha;
  const RealVector& w_final = trajectory.final_state();
  check_dimensions(problem, w_final, alpha);
  const double mu = trajectory.step_size;

  RealVector g = problem.upper_grad_lower(objective, w_final, alpha);
  RealVector h = problem.upper_grad_upper(objective, w_final, alpha);
  require_length(g, problem.dim_lower(), problem.name() + " upper_grad_lower");
  require_length(h, problem.dim_upper(), problem.name() + " upper_grad_upper");

  for (Index k = trajectory.num_steps() - 1; k >= 0; --k) {
    const RealVector& w = trajectory.states[static_cast<std::size_t>(k)];
    h -= mu * apply_hvp_aw(problem, mode, w, alpha, g);
    g -= mu * apply_hvp_ww(problem, mode, w, alpha, g);
    if (!h.allFinite() || !g.allFinite()) {
      throw NumericError("reverse_hypergrad: non-finite adjoint at step " + std::to_string(k));
    }
  }
  return h;
}

HyperGradients all_hypergrads(const BilevelProblem& problem, const Trajectory& trajectory,
                              HvpMode mode) {
  const Index m = problem.num_objectives();
  HyperGradients out{RealMatrix(m, problem.dim_upper())};
  for (Index i = 0; i < m; ++i) {
    out.rows.row(i) = reverse_hypergrad(problem, trajectory, i, mode).transpose();
  }
  return out;
}

RealVector fd_hypergrad(const BilevelProblem& problem, const RealVector& alpha,
                        const RealVector& w0, int num_steps, double step_size, Index objective,
                        double eps) {
  check_objective(problem, objective);
  if (!(eps > 0.0)) throw InvalidArgument("fd_hypergrad: eps must be > 0");
  check_dimensions(problem, w0, alpha);

  auto phi = [&](const RealVector& a) {
    const Trajectory traj = solve_lower(problem, a, w0, num_steps, step_size);
    const double value = problem.upper_objective(objective, traj.final_state(), a);
    require_finite(value, "fd_hypergrad objective");
    return value;
  };

  RealVector out(alpha.size());
  RealVector shifted = alpha;
  for (Index j = 0; j < alpha.size(); ++j) {
    const double step = eps * (1.0 + std::abs(alpha[j]));
    shifted[j] = alpha[j] + step;
    const double plus = phi(shifted);
    shifted[j] = alpha[j] - step;
    const double minus = phi(shifted);
    shifted[j] = alpha[j];
    out[j] = (plus - minus) / (2.0 * step);
  }
  return out;
}

}  // namespace moml
