#include "moml/pareto.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <optional>
#include <thread>

namespace moml {

void PointSet::add(ObjectiveVector point) { points.push_back(std::move(point)); }

void PointSet::add(ObjectiveVector point, RealVector tag) {
  points.push_back(std::move(point));
  tags.push_back(std::move(tag));
}

void PointSet::validate() const {
  for (const auto& p : points) {
    if (p.size() != dimension()) throw DimensionError("point set: mixed dimensions");
    require_finite(p, "point set entry");
  }
  if (!tags.empty() && tags.size() != points.size()) {
    throw DimensionError("point set: tag count does not match point count");
  }
}

bool dominates(const ObjectiveVector& l1, const ObjectiveVector& l2) {
  if (l1.size() != l2.size()) throw DimensionError("dominates: length mismatch");
  bool strict = false;
  for (Index i = 0; i < l1.size(); ++i) {
    if (l1[i] > l2[i]) return false;
    if (l1[i] < l2[i]) strict = true;
  }
  return strict;
}

bool strictly_dominates(const ObjectiveVector& l1, const ObjectiveVector& l2) {
  if (l1.size() != l2.size()) throw DimensionError("strictly_dominates: length mismatch");
  return (l1.array() < l2.array()).all();
}

PointSet minimal_points(const PointSet& set, Minimality kind) {
  if (set.empty()) throw InvalidArgument("minimal_points: empty set");
  set.validate();
  const auto beats = kind == Minimality::kPareto ? dominates : strictly_dominates;

  // Sorting by the first objective means only earlier points can dominate later ones
  // (ties on the first objective are checked both ways).
  std::vector<std::size_t> order(set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return set.points[a][0] < set.points[b][0];
  });

  std::vector<bool> keep(set.size(), true);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& candidate = set.points[order[pos]];
    for (std::size_t other = 0; other < order.size(); ++other) {
      const auto& rival = set.points[order[other]];
      if (other > pos && rival[0] > candidate[0]) break;
      if (other != pos && beats(rival, candidate)) {
        keep[order[pos]] = false;
        break;
      }
    }
  }

  PointSet out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!keep[i]) continue;
    if (set.has_tags()) {
      out.add(set.points[i], set.tags[i]);
    } else {
      out.add(set.points[i]);
    }
  }
  return out;
}

namespace {

double directed_hausdorff(const PointSet& from, const PointSet& to) {
  double worst = 0.0;
  for (const auto& p : from.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to.points) best = std::min(best, (p - q).squaredNorm());
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

}  // namespace

double hausdorff(const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("hausdorff: empty set");
  if (a.dimension() != b.dimension()) throw DimensionError("hausdorff: dimension mismatch");
  a.validate();
  b.validate();
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

std::vector<SimplexWeights> simplex_grid(Index num_objectives, int resolution) {
  if (resolution < 2) throw InvalidArgument("simplex grid: resolution must be >= 2");
  const int n = resolution - 1;
  const double step = 1.0 / n;
  std::vector<SimplexWeights> grid;
  if (num_objectives == 2) {
    for (int i = n; i >= 0; --i) {
      RealVector w(2);
      w << i * step, (n - i) * step;
      grid.push_back(project_simplex(w));
    }
  } else if (num_objectives == 3) {
    for (int i = n; i >= 0; --i) {
      for (int j = n - i; j >= 0; --j) {
        RealVector w(3);
        w << i * step, j * step, (n - i - j) * step;
        grid.push_back(project_simplex(w));
      }
    }
  } else {
    throw InvalidArgument("simplex grid: only 2 or 3 objectives are supported");
  }
  return grid;
}

FrontierResult frontier_by_scalarization(const BilevelProblem& problem, const SolverConfig& config,
                                         const RealVector& alpha0, int resolution,
                                         unsigned threads) {
  FrontierResult result;
  result.weights = simplex_grid(problem.num_objectives(), resolution);
  const std::size_t count = result.weights.size();

  std::vector<std::optional<RunReport>> reports(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        reports[i] = run_scalarized(problem, config, alpha0, result.weights[i]);
      } catch (const Error& e) {
        RunReport failed;
        failed.termination = Termination::kError;
        failed.error_message = e.what();
        reports[i] = std::move(failed);
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < count; ++i) {
    const RunReport& report = *reports[i];
    if (report.termination == Termination::kError) {
      ++result.failed_runs;
      result.failures.push_back(report.error_message);
      continue;
    }
    result.all_points.add(report.final_objectives, report.final_alpha);
  }
  if (result.all_points.empty()) throw NumericError("frontier: every scalarized run failed");
  result.front = minimal_points(result.all_points);
  return result;
}

}  // namespace moml
