#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "moml/error.hpp"

namespace moml {

using Index = Eigen::Index;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Inner product. Throws DimensionError on length mismatch.
double dot(const RealVector& a, const RealVector& b);

double norm2(const RealVector& a);

/// Returns s * x + y. Throws DimensionError on mismatch, NumericError if the result is not finite.
RealVector axpy(double s, const RealVector& x, const RealVector& y);

bool all_finite(const RealVector& v);
bool all_finite(const RealMatrix& m);

/// Throws NumericError naming `what` if any entry is NaN/Inf.
void require_finite(const RealVector& v, std::string_view what);
void require_finite(const RealMatrix& m, std::string_view what);
void require_finite(double x, std::string_view what);

/// Throws DimensionError unless v has exactly `expected` entries.
void require_length(const RealVector& v, Index expected, std::string_view what);

/// ||a - b|| / max(||a||, ||b||, floor). Symmetric in a and b.
double relative_error(const RealVector& a, const RealVector& b, double floor = 1e-12);

/// Counter-based generator: the k-th draw is a pure function of (seed, k), so streams are
/// identical on every platform and can be split by seeding with derived keys.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller; consumes two draws per call.
  double normal();

  RealVector uniform_vector(Index n, double lo, double hi);
  RealVector normal_vector(Index n);
  RealMatrix normal_matrix(Index rows, Index cols);

  /// Independent child stream keyed by `stream`.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer; the mixing function behind Rng.
std::uint64_t mix64(std::uint64_t x);

}  // namespace moml
