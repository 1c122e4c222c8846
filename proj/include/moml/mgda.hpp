#pragma once

#include "moml/numerics.hpp"

namespace moml {

/// A point of the probability simplex: nonnegative entries summing to one.
class SimplexWeights {
 public:
  /// Throws InvalidArgument if any entry is negative or the sum is off by more than 1e-12.
  explicit SimplexWeights(RealVector values);

  static SimplexWeights vertex(Index size, Index corner);
  static SimplexWeights uniform(Index size);

  const RealVector& values() const { return values_; }
  Index size() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

 private:
  RealVector values_;
};

struct QpSolution {
  SimplexWeights weights;
  /// sum_i gamma_i g_i
  RealVector direction;
  /// ||direction||^2
  double objective_value = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

struct MinNormOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

/// Euclidean projection onto the probability simplex (sort and threshold).
SimplexWeights project_simplex(const RealVector& v);

/// min over the simplex of ||G^T gamma||^2 by FISTA in Gram space.
///
/// Rows of G are the per-objective gradients. Step 1/L with L = trace(G G^T); stops when
/// successive iterates differ by less than tol in max-norm. Identical rows return the first
/// vertex.
QpSolution solve_min_norm(const RealMatrix& gradients, const MinNormOptions& options = {});

/// Closed-form two-gradient case:
///   gamma_1 = clip(((g2 - g1) . g2) / ||g1 - g2||^2, 0, 1).
QpSolution solve_two(const RealVector& g1, const RealVector& g2);

}  // namespace moml
