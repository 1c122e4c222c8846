#include <cmath>
#include <string>

#include "moml/suite.hpp"

namespace moml::suite {

void ArchSizeSpec::validate() const {
  if (num_edges < 1) throw InvalidArgument("arch size: need at least one edge");
  if (op_params.empty()) throw InvalidArgument("arch size: need at least one operation per edge");
  for (double n : op_params) {
    if (!std::isfinite(n) || n < 0.0) {
      throw InvalidArgument("arch size: parameter counts must be finite and >= 0");
    }
  }
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw InvalidArgument("arch size: target size must be > 0");
  }
}

namespace {

void check_logits(const ArchSizeSpec& spec, const RealMatrix& logits) {
  spec.validate();
  if (logits.rows() != spec.num_edges || logits.cols() != spec.num_ops()) {
    throw DimensionError("arch size: logits must be edges x ops");
  }
  require_finite(logits, "architecture logits");
}

RealVector op_param_vector(const ArchSizeSpec& spec) {
  return Eigen::Map<const RealVector>(spec.op_params.data(), spec.num_ops());
}

}  // namespace

RealMatrix edge_softmax(const RealMatrix& logits) {
  RealMatrix probs(logits.rows(), logits.cols());
  for (Index e = 0; e < logits.rows(); ++e) {
    const auto shifted = (logits.row(e).array() - logits.row(e).maxCoeff()).exp();
    probs.row(e) = shifted / shifted.sum();
  }
  return probs;
}

double soft_param_count(const ArchSizeSpec& spec, const RealMatrix& logits) {
  check_logits(spec, logits);
  return (edge_softmax(logits) * op_param_vector(spec)).sum();
}

double hard_param_count(const ArchSizeSpec& spec, const RealMatrix& logits) {
  check_logits(spec, logits);
  double total = 0.0;
  for (Index e = 0; e < logits.rows(); ++e) {
    Index best = 0;
    logits.row(e).maxCoeff(&best);
    total += spec.op_params[static_cast<std::size_t>(best)];
  }
  return total;
}

double size_loss(const ArchSizeSpec& spec, const RealMatrix& logits) {
  return std::abs(soft_param_count(spec, logits) - spec.target);
}

RealMatrix size_loss_grad(const ArchSizeSpec& spec, const RealMatrix& logits) {
  check_logits(spec, logits);
  const RealMatrix probs = edge_softmax(logits);
  const RealVector params = op_param_vector(spec);
  const double gap = (probs * params).sum() - spec.target;
  const double sign = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
  RealMatrix grad(probs.rows(), probs.cols());
  for (Index e = 0; e < probs.rows(); ++e) {
    const double expected = probs.row(e).dot(params);
    grad.row(e) = sign * (probs.row(e).array() * (params.transpose().array() - expected));
  }
  return grad;
}

// ---------------------------------------------------------------------------------------------

double apply_op(Index op, double x) {
  switch (op) {
    case 0:
      return x;
    case 1:
      return std::tanh(x);
    case 2:
      return x * x - 1.0;
    default:
      throw InvalidArgument("arch toy: unknown op id " + std::to_string(op));
  }
}

void ArchToySpec::validate() const {
  size.validate();
  if (size.num_ops() > 3) throw InvalidArgument("arch toy: at most three candidate ops");
  if (n_train < 1 || n_val < 1) throw InvalidArgument("arch toy: empty data split");
  if (!(noise >= 0.0) || !(ridge >= 0.0)) {
    throw InvalidArgument("arch toy: noise and ridge must be >= 0");
  }
}

ArchToy::ArchToy(const ArchToySpec& spec) : spec_(spec) {
  spec_.validate();
  const Index edges = spec_.size.num_edges;
  const Index ops = spec_.size.num_ops();
  Rng rng(spec_.seed);
  Rng truth_rng = rng.split(0);
  Rng sample_rng = rng.split(1);

  // Ground truth uses op (e mod ops) on edge e.
  const RealVector truth = truth_rng.normal_vector(edges);
  auto build = [&](int n) {
    Dataset data;
    data.y.resize(n);
    for (int s = 0; s < n; ++s) {
      RealMatrix features(edges, ops);
      double target = 0.0;
      for (Index e = 0; e < edges; ++e) {
        const double x = sample_rng.normal();
        for (Index o = 0; o < ops; ++o) features(e, o) = apply_op(o, x);
        target += truth[e] * features(e, e % ops);
      }
      data.y[s] = target + spec_.noise * sample_rng.normal();
      data.features.push_back(std::move(features));
    }
    return data;
  };
  train_ = build(spec_.n_train);
  val_ = build(spec_.n_val);
}

RealMatrix ArchToy::as_matrix(const RealVector& flat) const {
  const Index edges = spec_.size.num_edges;
  const Index ops = spec_.size.num_ops();
  RealMatrix m(edges, ops);
  for (Index e = 0; e < edges; ++e)
    for (Index o = 0; o < ops; ++o) m(e, o) = flat[e * ops + o];
  return m;
}

RealVector ArchToy::flatten(const RealMatrix& m) const {
  RealVector flat(m.size());
  for (Index e = 0; e < m.rows(); ++e)
    for (Index o = 0; o < m.cols(); ++o) flat[e * m.cols() + o] = m(e, o);
  return flat;
}

RealMatrix ArchToy::logits(const RealVector& alpha) const { return as_matrix(alpha); }

double ArchToy::predict(const RealMatrix& probs, const RealMatrix& weights,
                        const RealMatrix& features) const {
  return (probs.array() * weights.array() * features.array()).sum();
}

namespace {

// d/dalpha_{e,o'} of sum_o p_{e,o} m_{e,o} is p_{e,o'} (m_{e,o'} - sum_o p_{e,o} m_{e,o}).
RealMatrix mixture_jacobian(const RealMatrix& probs, const RealMatrix& mixed) {
  const RealVector row_means = (probs.array() * mixed.array()).rowwise().sum();
  return probs.array() * (mixed.colwise() - row_means).array();
}

}  // namespace

double ArchToy::loss(const Dataset& data, const RealVector& w, const RealVector& alpha) const {
  const RealMatrix probs = edge_softmax(as_matrix(alpha));
  const RealMatrix weights = as_matrix(w);
  double total = 0.0;
  for (std::size_t s = 0; s < data.features.size(); ++s) {
    const double r = predict(probs, weights, data.features[s]) - data.y[static_cast<Index>(s)];
    total += 0.5 * r * r;
  }
  return total / static_cast<double>(data.features.size());
}

RealVector ArchToy::loss_grad_w(const Dataset& data, const RealVector& w,
                                const RealVector& alpha) const {
  const RealMatrix probs = edge_softmax(as_matrix(alpha));
  const RealMatrix weights = as_matrix(w);
  RealMatrix grad = RealMatrix::Zero(probs.rows(), probs.cols());
  for (std::size_t s = 0; s < data.features.size(); ++s) {
    const RealMatrix& phi = data.features[s];
    const double r = predict(probs, weights, phi) - data.y[static_cast<Index>(s)];
    grad.array() += r * probs.array() * phi.array();
  }
  return flatten(grad) / static_cast<double>(data.features.size());
}

RealVector ArchToy::loss_grad_alpha(const Dataset& data, const RealVector& w,
                                    const RealVector& alpha) const {
  const RealMatrix probs = edge_softmax(as_matrix(alpha));
  const RealMatrix weights = as_matrix(w);
  RealMatrix grad = RealMatrix::Zero(probs.rows(), probs.cols());
  for (std::size_t s = 0; s < data.features.size(); ++s) {
    const RealMatrix& phi = data.features[s];
    const double r = predict(probs, weights, phi) - data.y[static_cast<Index>(s)];
    const RealMatrix mixed = weights.cwiseProduct(phi);
    grad += r * mixture_jacobian(probs, mixed);
  }
  return flatten(grad) / static_cast<double>(data.features.size());
}

double ArchToy::lower_objective(const RealVector& w, const RealVector& alpha) const {
  return loss(train_, w, alpha) + 0.5 * spec_.ridge * w.squaredNorm();
}

RealVector ArchToy::lower_grad(const RealVector& w, const RealVector& alpha) const {
  return loss_grad_w(train_, w, alpha) + spec_.ridge * w;
}

double ArchToy::upper_objective(Index i, const RealVector& w, const RealVector& alpha) const {
  if (i == 0) return loss(val_, w, alpha);
  return size_loss(spec_.size, as_matrix(alpha));
}

RealVector ArchToy::upper_grad_lower(Index i, const RealVector& w,
                                     const RealVector& alpha) const {
  if (i == 0) return loss_grad_w(val_, w, alpha);
  return RealVector::Zero(dim_lower());
}

RealVector ArchToy::upper_grad_upper(Index i, const RealVector& w,
                                     const RealVector& alpha) const {
  if (i == 0) return loss_grad_alpha(val_, w, alpha);
  return flatten(size_loss_grad(spec_.size, as_matrix(alpha)));
}

RealVector ArchToy::hvp_ww(const RealVector&, const RealVector& alpha,
                           const RealVector& v) const {
  const RealMatrix probs = edge_softmax(as_matrix(alpha));
  const RealMatrix dir = as_matrix(v);
  RealMatrix out = RealMatrix::Zero(probs.rows(), probs.cols());
  for (const RealMatrix& phi : train_.features) {
    const RealMatrix basis = probs.cwiseProduct(phi);
    out += (basis.cwiseProduct(dir).sum()) * basis;
  }
  return flatten(out) / static_cast<double>(train_.features.size()) + spec_.ridge * v;
}

RealVector ArchToy::hvp_aw(const RealVector& w, const RealVector& alpha,
                           const RealVector& v) const {
  // grad_w f . v = mean_s r_s (p o phi_s) . V, differentiated in alpha term by term.
  const RealMatrix probs = edge_softmax(as_matrix(alpha));
  const RealMatrix weights = as_matrix(w);
  const RealMatrix dir = as_matrix(v);
  RealMatrix out = RealMatrix::Zero(probs.rows(), probs.cols());
  for (std::size_t s = 0; s < train_.features.size(); ++s) {
    const RealMatrix& phi = train_.features[s];
    const double r = predict(probs, weights, phi) - train_.y[static_cast<Index>(s)];
    const double projected = predict(probs, dir, phi);
    out += projected * mixture_jacobian(probs, weights.cwiseProduct(phi)) +
           r * mixture_jacobian(probs, dir.cwiseProduct(phi));
  }
  return flatten(out) / static_cast<double>(train_.features.size());
}

}  // namespace moml::suite
