#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moml/hypergrad.hpp"
#include "moml/mgda.hpp"

namespace moml {

struct SolverConfig {
  int outer_iterations = 100;  // T
  int inner_iterations = 10;   // K
  double lower_step = 0.1;     // mu
  double upper_step = 0.1;     // nu
  /// Start each lower solve from the previous w_K instead of `lower_init`.
  bool warm_start = false;
  /// Stop once ||d_t|| < stationarity_tol; 0 disables early stopping.
  double stationarity_tol = 0.0;
  std::uint64_t seed = 0;
  /// Cold-start lower initialisation; zero when empty.
  RealVector lower_init;
  HvpMode hvp_mode = HvpMode::kAuto;
  MinNormOptions qp;

  /// Throws InvalidArgument on T, K < 1, non-positive steps or a negative tolerance.
  void validate() const;
};

struct IterationRecord {
  int t = 0;
  RealVector alpha;
  /// phi_K(alpha_t) evaluated at w_K.
  ObjectiveVector objectives;
  /// phi(alpha_t) at the exact lower solution, for problems with a closed form.
  std::optional<ObjectiveVector> exact_objectives;
  RealVector gamma;
  double direction_norm = 0.0;
  double wall_ms = 0.0;
};

enum class Termination { kMaxIterations, kStationarity, kError };

std::string to_string(Termination reason);

struct RunReport {
  std::vector<IterationRecord> records;
  RealVector final_alpha;
  /// phi_K at final_alpha (after the last update).
  ObjectiveVector final_objectives;
  Termination termination = Termination::kMaxIterations;
  std::string error_message;
};

/// MGDA-weighted bi-level descent: per outer iteration, K lower steps, all hypergradients, the
/// min-norm weights and alpha <- clamp(alpha - nu * d).
///
/// Oracle failures end the run with Termination::kError and a message that names the outer
/// iteration; records up to that point are kept.
RunReport run_moml(const BilevelProblem& problem, const SolverConfig& config,
                   const RealVector& alpha0);

/// Same loop, gamma_t fixed to `weights` instead of solving the QP.
RunReport run_scalarized(const BilevelProblem& problem, const SolverConfig& config,
                         const RealVector& alpha0, const SimplexWeights& weights);

}  // namespace moml
