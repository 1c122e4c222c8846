#pragma once

#include <string>
#include <vector>

#include "moml/driver.hpp"

namespace moml {

/// Objective vectors of uniform length, each optionally tagged (e.g. with the alpha that
/// produced it).
struct PointSet {
  std::vector<ObjectiveVector> points;
  std::vector<RealVector> tags;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_tags() const { return !tags.empty(); }
  /// Objective dimension m, or 0 when empty.
  Index dimension() const { return points.empty() ? 0 : points.front().size(); }

  void add(ObjectiveVector point);
  void add(ObjectiveVector point, RealVector tag);

  /// Throws unless every point has the same length and finite entries, and tags (if any) are
  /// one per point.
  void validate() const;
};

/// l1 dominates l2: l1 <= l2 everywhere and l1 < l2 somewhere.
bool dominates(const ObjectiveVector& l1, const ObjectiveVector& l2);

/// l1 < l2 in every coordinate.
bool strictly_dominates(const ObjectiveVector& l1, const ObjectiveVector& l2);

enum class Minimality {
  /// Min: drop points dominated by another point.
  kPareto,
  /// WMin: drop only points strictly dominated in every coordinate.
  kWeak,
};

/// Points of `set` that no other point dominates, in input order. Duplicates of a minimal point
/// are all kept, as are their tags.
PointSet minimal_points(const PointSet& set, Minimality kind = Minimality::kPareto);

/// Symmetric Hausdorff distance in the Euclidean norm.
double hausdorff(const PointSet& a, const PointSet& b);

/// Uniform grid of the simplex with `resolution` points per edge, in lexicographic order of the
/// leading coordinates. Supports m = 2 and m = 3.
std::vector<SimplexWeights> simplex_grid(Index num_objectives, int resolution);

struct FrontierResult {
  /// Minimal points of the final phi_K vectors, tagged with the final alphas.
  PointSet front;
  /// Every scalarized run's final point, in grid order, before filtering.
  PointSet all_points;
  std::vector<SimplexWeights> weights;
  int failed_runs = 0;
  std::vector<std::string> failures;
};

/// Runs run_scalarized for every weight of simplex_grid(m, resolution) from alpha0 and keeps
/// the minimal points. Grid points run on up to `threads` workers (0 = hardware concurrency);
/// results do not depend on the thread count.
FrontierResult frontier_by_scalarization(const BilevelProblem& problem, const SolverConfig& config,
                                         const RealVector& alpha0, int resolution,
                                         unsigned threads = 0);

}  // namespace moml
