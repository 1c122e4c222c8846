#pragma once

#include <optional>
#include <string>

#include "moml/numerics.hpp"

namespace moml {

/// One entry per upper-level objective, (F_1, ..., F_m).
using ObjectiveVector = RealVector;

/// Coordinate-wise bounds on the upper variable.
struct Box {
  RealVector lower;
  RealVector upper;

  /// Throws InvalidArgument unless lower <= upper coordinate-wise and both are finite.
  void validate() const;
  bool contains(const RealVector& x) const;
  RealVector clamp(const RealVector& x) const;
};

/// A multi-objective bi-level problem
///
///   min_alpha (F_1(w*(alpha), alpha), ..., F_m(w*(alpha), alpha))
///   s.t.      w*(alpha) = argmin_w f(w, alpha)
///
/// described through first-order oracles. Second-order products of the lower objective are
/// optional; when `has_analytic_hvp()` is false the finite-difference versions below are used.
///
/// Implementations must be pure (const, no hidden mutable state): the driver and the frontier
/// sweep evaluate one instance from several threads.
class BilevelProblem {
 public:
  virtual ~BilevelProblem() = default;

  virtual std::string name() const = 0;
  virtual Index dim_lower() const = 0;
  virtual Index dim_upper() const = 0;
  virtual Index num_objectives() const = 0;

  virtual double lower_objective(const RealVector& w, const RealVector& alpha) const = 0;
  virtual RealVector lower_grad(const RealVector& w, const RealVector& alpha) const = 0;

  /// Objective index i is zero-based.
  virtual double upper_objective(Index i, const RealVector& w, const RealVector& alpha) const = 0;
  virtual RealVector upper_grad_lower(Index i, const RealVector& w,
                                      const RealVector& alpha) const = 0;
  virtual RealVector upper_grad_upper(Index i, const RealVector& w,
                                      const RealVector& alpha) const = 0;

  virtual bool has_analytic_hvp() const { return false; }
  /// d^2 f / dw dw applied to v (length dim_lower).
  virtual RealVector hvp_ww(const RealVector& w, const RealVector& alpha,
                            const RealVector& v) const;
  /// grad_alpha (grad_w f . v), length dim_upper.
  virtual RealVector hvp_aw(const RealVector& w, const RealVector& alpha,
                            const RealVector& v) const;

  virtual std::optional<Box> domain_box() const { return std::nullopt; }

  /// phi(alpha) = F(w*(alpha), alpha) when a closed form exists.
  virtual std::optional<ObjectiveVector> exact_objectives(const RealVector& /*alpha*/) const {
    return std::nullopt;
  }
};

/// Throws DimensionError unless w and alpha match the problem's dimensions.
void check_dimensions(const BilevelProblem& problem, const RealVector& w,
                      const RealVector& alpha);

/// (F_1(w, alpha), ..., F_m(w, alpha)). Requires alpha inside the domain box when one exists.
ObjectiveVector eval_upper(const BilevelProblem& problem, const RealVector& w,
                           const RealVector& alpha);

/// Central difference of lower_grad along v with step sqrt(eps) (1 + ||w||) / ||v||.
RealVector fd_hvp_ww(const BilevelProblem& problem, const RealVector& w, const RealVector& alpha,
                     const RealVector& v);

/// Coordinate-wise central difference of alpha -> lower_grad(w, alpha) . v.
RealVector fd_hvp_aw(const BilevelProblem& problem, const RealVector& w, const RealVector& alpha,
                     const RealVector& v);

enum class HvpMode {
  /// Analytic products when the problem supplies them, finite differences otherwise.
  kAuto,
  kFiniteDifference,
};

/// HVP dispatch used by the reverse pass. A zero v returns zero without calling any oracle.
RealVector apply_hvp_ww(const BilevelProblem& problem, HvpMode mode, const RealVector& w,
                        const RealVector& alpha, const RealVector& v);
RealVector apply_hvp_aw(const BilevelProblem& problem, HvpMode mode, const RealVector& w,
                        const RealVector& alpha, const RealVector& v);

}  // namespace moml
