#pragma once

#include "moml/lower_solver.hpp"

namespace moml {

/// Row i holds d F_i(w_K(alpha), alpha) / d alpha.
struct HyperGradients {
  RealMatrix rows;

  Index num_objectives() const { return rows.rows(); }
  RealVector row(Index i) const { return rows.row(i).transpose(); }
};

/// Reverse-mode derivative of alpha -> F_i(w_K(alpha), alpha) through the stored trajectory.
///
/// With g = grad_w F_i(w_K) and h = grad_alpha F_i(w_K), walking k = K-1 .. 0:
///   h <- h - mu * H_aw(w_k) g
///   g <- g - mu * H_ww(w_k) g
RealVector reverse_hypergrad(const BilevelProblem& problem, const Trajectory& trajectory,
                             Index objective, HvpMode mode = HvpMode::kAuto);

HyperGradients all_hypergrads(const BilevelProblem& problem, const Trajectory& trajectory,
                              HvpMode mode = HvpMode::kAuto);

/// Central differences of alpha -> F_i(w_K(alpha), alpha), re-solving the lower level at every
/// perturbation. Coordinate j uses step eps * (1 + |alpha_j|).
RealVector fd_hypergrad(const BilevelProblem& problem, const RealVector& alpha,
                        const RealVector& w0, int num_steps, double step_size, Index objective,
                        double eps = 1e-5);

}  // namespace moml
