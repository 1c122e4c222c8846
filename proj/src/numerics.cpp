#include "moml/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace moml {

namespace {

void require_same_length(const RealVector& a, const RealVector& b, std::string_view op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

double dot(const RealVector& a, const RealVector& b) {
  require_same_length(a, b, "dot");
  return a.dot(b);
}

double norm2(const RealVector& a) { return a.norm(); }

RealVector axpy(double s, const RealVector& x, const RealVector& y) {
  require_same_length(x, y, "axpy");
  RealVector out = s * x + y;
  require_finite(out, "axpy result");
  return out;
}

bool all_finite(const RealVector& v) { return v.allFinite(); }
bool all_finite(const RealMatrix& m) { return m.allFinite(); }

void require_finite(const RealVector& v, std::string_view what) {
  if (!v.allFinite()) throw NumericError(std::string(what) + " is not finite");
}

void require_finite(const RealMatrix& m, std::string_view what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + " is not finite");
}

void require_finite(double x, std::string_view what) {
  if (!std::isfinite(x)) throw NumericError(std::string(what) + " is not finite");
}

void require_length(const RealVector& v, Index expected, std::string_view what) {
  if (v.size() != expected) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(v.size()));
  }
}

double relative_error(const RealVector& a, const RealVector& b, double floor) {
  require_same_length(a, b, "relative_error");
  const double scale = std::max({a.norm(), b.norm(), floor});
  return (a - b).norm() / scale;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t key = mix64(seed_);
  return mix64(key ^ (counter_++ * 0xd1342543de82ef95ULL));
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RealVector Rng::uniform_vector(Index n, double lo, double hi) {
  RealVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
  return v;
}

RealVector Rng::normal_vector(Index n) {
  RealVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

RealMatrix Rng::normal_matrix(Index rows, Index cols) {
  RealMatrix m(rows, cols);
  // Row-major fill so the stream order does not depend on Eigen's storage order.
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = normal();
  return m;
}

Rng Rng::split(std::uint64_t stream) const { return Rng(mix64(seed_ ^ mix64(stream + 1))); }

}  // namespace moml
