#pragma once

#include <vector>

#include "moml/problem.hpp"

namespace moml {

/// w_0 ... w_K of one lower-level solve, replayable from (problem, alpha, w_0, step_size).
struct Trajectory {
  std::vector<RealVector> states;
  double step_size = 0.0;
  RealVector alpha;

  Index num_steps() const { return static_cast<Index>(states.size()) - 1; }
  const RealVector& final_state() const { return states.back(); }
};

struct LowerSolveOptions {
  /// Abort once ||w_k|| exceeds this bound.
  double divergence_bound = 1e100;
};

/// K steps of w_{k+1} = w_k - step_size * grad_w f(w_k, alpha).
Trajectory solve_lower(const BilevelProblem& problem, const RealVector& alpha,
                       const RealVector& w0, int num_steps, double step_size,
                       const LowerSolveOptions& options = {});

/// ||grad_w f(w_K, alpha)||.
double lower_residual(const BilevelProblem& problem, const Trajectory& trajectory);

}  // namespace moml
