#include "moml/problem.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace moml {

void Box::validate() const {
  if (lower.size() != upper.size()) throw InvalidArgument("box: bound lengths differ");
  if (!lower.allFinite() || !upper.allFinite()) throw InvalidArgument("box: bounds not finite");
  for (Index j = 0; j < lower.size(); ++j) {
    if (lower[j] > upper[j]) {
      throw InvalidArgument("box: lower > upper at coordinate " + std::to_string(j));
    }
  }
}

bool Box::contains(const RealVector& x) const {
  if (x.size() != lower.size()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

RealVector Box::clamp(const RealVector& x) const {
  require_length(x, lower.size(), "box clamp");
  return x.cwiseMax(lower).cwiseMin(upper);
}

RealVector BilevelProblem::hvp_ww(const RealVector&, const RealVector&,
                                  const RealVector&) const {
  throw InvalidArgument(name() + ": no analytic hvp_ww");
}

RealVector BilevelProblem::hvp_aw(const RealVector&, const RealVector&,
                                  const RealVector&) const {
  throw InvalidArgument(name() + ": no analytic hvp_aw");
}

void check_dimensions(const BilevelProblem& problem, const RealVector& w,
                      const RealVector& alpha) {
  require_length(w, problem.dim_lower(), problem.name() + " lower variable");
  require_length(alpha, problem.dim_upper(), problem.name() + " upper variable");
}

ObjectiveVector eval_upper(const BilevelProblem& problem, const RealVector& w,
                           const RealVector& alpha) {
  check_dimensions(problem, w, alpha);
  if (auto box = problem.domain_box(); box && !box->contains(alpha)) {
    throw InvalidArgument(problem.name() + ": upper variable outside the domain box");
  }
  ObjectiveVector out(problem.num_objectives());
  for (Index i = 0; i < out.size(); ++i) {
    out[i] = problem.upper_objective(i, w, alpha);
    require_finite(out[i], problem.name() + " objective " + std::to_string(i + 1));
  }
  return out;
}

namespace {

const double kSqrtEps = std::sqrt(std::numeric_limits<double>::epsilon());

}  // namespace

RealVector fd_hvp_ww(const BilevelProblem& problem, const RealVector& w, const RealVector& alpha,
                     const RealVector& v) {
  check_dimensions(problem, w, alpha);
  require_length(v, problem.dim_lower(), "fd_hvp_ww direction");
  const double vnorm = v.norm();
  if (vnorm == 0.0) throw InvalidArgument("fd_hvp_ww: zero direction");
  const double eps = kSqrtEps * (1.0 + w.norm()) / vnorm;
  const RealVector plus = problem.lower_grad(w + eps * v, alpha);
  const RealVector minus = problem.lower_grad(w - eps * v, alpha);
  require_finite(plus, "fd_hvp_ww gradient at w + eps v");
  require_finite(minus, "fd_hvp_ww gradient at w - eps v");
  return (plus - minus) / (2.0 * eps);
}

RealVector fd_hvp_aw(const BilevelProblem& problem, const RealVector& w, const RealVector& alpha,
                     const RealVector& v) {
  check_dimensions(problem, w, alpha);
  require_length(v, problem.dim_lower(), "fd_hvp_aw direction");
  const double vnorm = v.norm();
  if (vnorm == 0.0) throw InvalidArgument("fd_hvp_aw: zero direction");
  const double eps = kSqrtEps * (1.0 + alpha.norm());
  RealVector out(problem.dim_upper());
  RealVector shifted = alpha;
  for (Index j = 0; j < alpha.size(); ++j) {
    shifted[j] = alpha[j] + eps;
    const RealVector plus = problem.lower_grad(w, shifted);
    shifted[j] = alpha[j] - eps;
    const RealVector minus = problem.lower_grad(w, shifted);
    shifted[j] = alpha[j];
    require_finite(plus, "fd_hvp_aw gradient at alpha + eps e_j");
    require_finite(minus, "fd_hvp_aw gradient at alpha - eps e_j");
    out[j] = (plus - minus).dot(v) / (2.0 * eps);
  }
  return out;
}

RealVector apply_hvp_ww(const BilevelProblem& problem, HvpMode mode, const RealVector& w,
                        const RealVector& alpha, const RealVector& v) {
  if (v.isZero(0.0)) return RealVector::Zero(problem.dim_lower());
  if (mode == HvpMode::kAuto && problem.has_analytic_hvp()) {
    RealVector out = problem.hvp_ww(w, alpha, v);
    require_length(out, problem.dim_lower(), problem.name() + " hvp_ww");
    return out;
  }
  return fd_hvp_ww(problem, w, alpha, v);
}

RealVector apply_hvp_aw(const BilevelProblem& problem, HvpMode mode, const RealVector& w,
                        const RealVector& alpha, const RealVector& v) {
  if (v.isZero(0.0)) return RealVector::Zero(problem.dim_upper());
  if (mode == HvpMode::kAuto && problem.has_analytic_hvp()) {
    RealVector out = problem.hvp_aw(w, alpha, v);
    require_length(out, problem.dim_upper(), problem.name() + " hvp_aw");
    return out;
  }
  return fd_hvp_aw(problem, w, alpha, v);
}

}  // namespace moml
