#include "moml/mgda.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace moml {

SimplexWeights::SimplexWeights(RealVector values) : values_(std::move(values)) {
  if (values_.size() < 1) throw InvalidArgument("simplex weights: empty");
  if (!values_.allFinite()) throw InvalidArgument("simplex weights: not finite");
  if ((values_.array() < 0.0).any()) throw InvalidArgument("simplex weights: negative entry");
  if (std::abs(values_.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("simplex weights: entries sum to " + std::to_string(values_.sum()));
  }
}

SimplexWeights SimplexWeights::vertex(Index size, Index corner) {
  RealVector v = RealVector::Zero(size);
  v[corner] = 1.0;
  return SimplexWeights(std::move(v));
}

SimplexWeights SimplexWeights::uniform(Index size) {
  return project_simplex(RealVector::Constant(size, 1.0 / static_cast<double>(size)));
}

SimplexWeights project_simplex(const RealVector& v) {
  const Index n = v.size();
  if (n < 1) throw InvalidArgument("project_simplex: empty vector");
  require_finite(v, "project_simplex input");

  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  RealVector out = (v.array() - tau).cwiseMax(0.0);

  // Rounding can leave the sum a few ulps away from one; put the residual on the largest entry,
  // which keeps every coordinate nonnegative.
  Index largest = 0;
  out.maxCoeff(&largest);
  out[largest] += 1.0 - out.sum();
  out[largest] = std::max(out[largest], 0.0);
  return SimplexWeights(std::move(out));
}

namespace {

QpSolution make_solution(const RealMatrix& gradients, SimplexWeights weights, int iterations,
                         bool converged) {
  RealVector direction = gradients.transpose() * weights.values();
  const double value = direction.squaredNorm();
  return QpSolution{std::move(weights), std::move(direction), value, iterations, converged};
}

bool rows_identical(const RealMatrix& gradients) {
  for (Index i = 1; i < gradients.rows(); ++i) {
    if (gradients.row(i) != gradients.row(0)) return false;
  }
  return true;
}

}  // namespace

QpSolution solve_min_norm(const RealMatrix& gradients, const MinNormOptions& options) {
  const Index m = gradients.rows();
  if (m < 1) throw InvalidArgument("solve_min_norm: no objectives");
  require_finite(gradients, "solve_min_norm gradients");
  if (!(options.tol >= 0.0) || options.max_iter < 1) {
    throw InvalidArgument("solve_min_norm: need tol >= 0 and max_iter >= 1");
  }
  if (m == 1 || rows_identical(gradients)) {
    return make_solution(gradients, SimplexWeights::vertex(m, 0), 0, true);
  }

  const RealMatrix gram = gradients * gradients.transpose();
  const double lipschitz = gram.trace();

  RealVector x = RealVector::Constant(m, 1.0 / static_cast<double>(m));
  RealVector y = x;
  double t = 1.0;
  int iter = 0;
  bool converged = false;
  while (iter < options.max_iter) {
    ++iter;
    const RealVector x_next = project_simplex(y - (gram * y) / lipschitz).values();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double change = (x_next - x).cwiseAbs().maxCoeff();
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = x_next;
    t = t_next;
    if (change < options.tol) {
      converged = true;
      break;
    }
  }
  return make_solution(gradients, SimplexWeights(x), iter, converged);
}

QpSolution solve_two(const RealVector& g1, const RealVector& g2) {
  if (g1.size() != g2.size()) throw DimensionError("solve_two: gradient lengths differ");
  RealMatrix gradients(2, g1.size());
  gradients.row(0) = g1.transpose();
  gradients.row(1) = g2.transpose();
  const RealVector diff = g1 - g2;
  const double denom = diff.squaredNorm();
  if (denom == 0.0) return make_solution(gradients, SimplexWeights::vertex(2, 0), 0, true);
  const double gamma1 = std::clamp((g2 - g1).dot(g2) / denom, 0.0, 1.0);
  RealVector weights(2);
  weights << gamma1, 1.0 - gamma1;
  return make_solution(gradients, SimplexWeights(std::move(weights)), 0, true);
}

}  // namespace moml
