#include <algorithm>
#include <cmath>
#include <string>

#include "moml/suite.hpp"

namespace moml::suite {

void QuadraticBilevelSpec::validate() const {
  const Index p = A.rows();
  if (p < 1 || A.cols() != p) throw InvalidArgument("qb: A must be square and non-empty");
  if (B.rows() != p || B.cols() < 1) throw InvalidArgument("qb: B must be dim_lower x dim_upper");
  if (b.size() != p) throw InvalidArgument("qb: offset b must have dim_lower entries");
  if (centers.empty()) throw InvalidArgument("qb: need at least one objective");
  if (anchors.size() != centers.size()) {
    throw InvalidArgument("qb: one anchor per objective required");
  }
  for (const auto& c : centers) {
    if (c.size() != p) throw InvalidArgument("qb: centers must have dim_lower entries");
  }
  for (const auto& a : anchors) {
    if (a.size() != B.cols()) throw InvalidArgument("qb: anchors must have dim_upper entries");
  }
  if (!(lambda >= 0.0)) throw InvalidArgument("qb: lambda must be >= 0");
  if (!A.allFinite() || !B.allFinite() || !b.allFinite()) {
    throw InvalidArgument("qb: non-finite coefficients");
  }
  if (!A.isApprox(A.transpose(), 1e-12)) throw InvalidArgument("qb: A must be symmetric");
  if (Eigen::LLT<RealMatrix>(A).info() != Eigen::Success) {
    throw InvalidArgument("qb: A must be positive definite");
  }
}

namespace {

QuadraticBilevelSpec symmetric_spec(Index n, double off_diagonal, double lambda, double coupling,
                                    double spread, Index objectives) {
  QuadraticBilevelSpec spec;
  spec.A = RealMatrix::Constant(n, n, off_diagonal);
  spec.A.diagonal().setConstant(5.0);
  spec.B = coupling * RealMatrix::Identity(n, n);
  spec.b = RealVector::Zero(n);
  for (Index i = 0; i < objectives; ++i) {
    spec.centers.push_back(spread * RealVector::Unit(n, i));
    spec.anchors.push_back(spread * RealVector::Unit(n, i));
  }
  spec.lambda = lambda;
  spec.validate();
  return spec;
}

}  // namespace

QuadraticBilevelSpec qb2_spec(double lambda, double coupling, double spread) {
  return symmetric_spec(2, 1.0, lambda, coupling, spread, 2);
}

QuadraticBilevelSpec qb3_spec(double lambda, double coupling, double spread) {
  return symmetric_spec(3, 0.5, lambda, coupling, spread, 3);
}

QuadraticBilevel::QuadraticBilevel(QuadraticBilevelSpec spec, std::string name)
    : spec_(std::move(spec)), name_(std::move(name)) {
  spec_.validate();
}

double QuadraticBilevel::lower_objective(const RealVector& w, const RealVector& alpha) const {
  return 0.5 * w.dot(spec_.A * w) - w.dot(spec_.B * alpha + spec_.b);
}

RealVector QuadraticBilevel::lower_grad(const RealVector& w, const RealVector& alpha) const {
  return spec_.A * w - spec_.B * alpha - spec_.b;
}

double QuadraticBilevel::upper_objective(Index i, const RealVector& w,
                                         const RealVector& alpha) const {
  return 0.5 * (w - spec_.centers[i]).squaredNorm() +
         0.5 * spec_.lambda * (alpha - spec_.anchors[i]).squaredNorm();
}

RealVector QuadraticBilevel::upper_grad_lower(Index i, const RealVector& w,
                                              const RealVector&) const {
  return w - spec_.centers[i];
}

RealVector QuadraticBilevel::upper_grad_upper(Index i, const RealVector&,
                                              const RealVector& alpha) const {
  return spec_.lambda * (alpha - spec_.anchors[i]);
}

RealVector QuadraticBilevel::hvp_ww(const RealVector&, const RealVector&,
                                    const RealVector& v) const {
  return spec_.A * v;
}

RealVector QuadraticBilevel::hvp_aw(const RealVector&, const RealVector&,
                                    const RealVector& v) const {
  return -spec_.B.transpose() * v;
}

std::optional<ObjectiveVector> QuadraticBilevel::exact_objectives(const RealVector& alpha) const {
  return qb_analytic_objectives(spec_, alpha);
}

RealVector qb_analytic_lower_opt(const QuadraticBilevelSpec& spec, const RealVector& alpha) {
  require_length(alpha, spec.dim_upper(), "qb upper variable");
  return spec.A.llt().solve(spec.B * alpha + spec.b);
}

ObjectiveVector qb_analytic_objectives(const QuadraticBilevelSpec& spec, const RealVector& alpha) {
  const RealVector w = qb_analytic_lower_opt(spec, alpha);
  ObjectiveVector out(spec.num_objectives());
  for (Index i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * (w - spec.centers[static_cast<std::size_t>(i)]).squaredNorm() +
             0.5 * spec.lambda * (alpha - spec.anchors[static_cast<std::size_t>(i)]).squaredNorm();
  }
  return out;
}

RealMatrix qb_upper_hessian(const QuadraticBilevelSpec& spec) {
  const RealMatrix coupling = spec.A.llt().solve(spec.B);  // dw*/dalpha
  return coupling.transpose() * coupling +
         spec.lambda * RealMatrix::Identity(spec.dim_upper(), spec.dim_upper());
}

RealVector qb_objective_minimizer(const QuadraticBilevelSpec& spec, Index i) {
  if (i < 0 || i >= spec.num_objectives()) throw InvalidArgument("qb: objective out of range");
  const auto llt = spec.A.llt();
  const RealMatrix coupling = llt.solve(spec.B);
  const RealVector offset = llt.solve(spec.b);
  const RealMatrix hessian = qb_upper_hessian(spec);
  const RealVector rhs =
      coupling.transpose() * (spec.centers[static_cast<std::size_t>(i)] - offset) +
      spec.lambda * spec.anchors[static_cast<std::size_t>(i)];
  Eigen::LLT<RealMatrix> factor(hessian);
  if (factor.info() != Eigen::Success || hessian.diagonal().minCoeff() <= 0.0) {
    throw InvalidArgument("qb: upper Hessian is singular; single-objective minimizer not unique");
  }
  return factor.solve(rhs);
}

PointSet qb_analytic_front(const QuadraticBilevelSpec& spec, int samples) {
  if (spec.num_objectives() != 2) {
    throw InvalidArgument("qb_analytic_front: requires exactly two objectives");
  }
  if (samples < 2) throw InvalidArgument("qb_analytic_front: need at least two samples");
  const RealVector first = qb_objective_minimizer(spec, 0);
  const RealVector second = qb_objective_minimizer(spec, 1);
  PointSet front;
  if (first == second) {
    front.add(qb_analytic_objectives(spec, first), first);
    return front;
  }
  for (int s = 0; s < samples; ++s) {
    const double t = static_cast<double>(s) / (samples - 1);
    const RealVector alpha = (1.0 - t) * first + t * second;
    front.add(qb_analytic_objectives(spec, alpha), alpha);
  }
  return front;
}

double qb_pareto_distance(const QuadraticBilevelSpec& spec, const RealVector& alpha) {
  if (spec.num_objectives() != 2) {
    throw InvalidArgument("qb_pareto_distance: requires exactly two objectives");
  }
  const RealVector first = qb_objective_minimizer(spec, 0);
  const RealVector second = qb_objective_minimizer(spec, 1);
  const RealVector edge = second - first;
  const double length2 = edge.squaredNorm();
  const double t =
      length2 == 0.0 ? 0.0 : std::clamp((alpha - first).dot(edge) / length2, 0.0, 1.0);
  return (alpha - (first + t * edge)).norm();
}

}  // namespace moml::suite
