#include <cmath>
#include <string>

#include "moml/suite.hpp"

namespace moml::suite {

double mean_squared_loss(const RegressionSet& set, const RealVector& w) {
  const RealVector residual = set.x * w - set.y;
  return 0.5 * residual.squaredNorm() / static_cast<double>(set.y.size());
}

RealVector mean_squared_loss_grad(const RegressionSet& set, const RealVector& w) {
  return set.x.transpose() * (set.x * w - set.y) / static_cast<double>(set.y.size());
}

namespace {

RealVector gram_apply(const RegressionSet& set, const RealVector& v) {
  return set.x.transpose() * (set.x * v) / static_cast<double>(set.y.size());
}

RegressionSet sample_linear(Rng& rng, int n, const RealVector& truth, double noise) {
  RegressionSet set;
  set.x = rng.normal_matrix(n, truth.size());
  set.y = set.x * truth;
  for (int s = 0; s < n; ++s) set.y[s] += noise * rng.normal();
  return set;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Multi-task loss weighting

void MtlToySpec::validate() const {
  if (num_tasks < 1) throw InvalidArgument("mtl_toy: need at least one task");
  if (dim < num_tasks + 1) throw InvalidArgument("mtl_toy: dim must exceed the task count");
  if (n_train < dim || n_val < dim) {
    throw InvalidArgument("mtl_toy: per-task sample counts must be >= dim");
  }
  if (!(noise >= 0.0)) throw InvalidArgument("mtl_toy: noise must be >= 0");
  if (!(similarity >= 0.0 && similarity <= 1.0)) {
    throw InvalidArgument("mtl_toy: similarity must lie in [0, 1]");
  }
  if (!(ridge >= 0.0)) throw InvalidArgument("mtl_toy: ridge must be >= 0");
}

MtlToyData make_mtl_data(const MtlToySpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Rng basis_rng = rng.split(0);
  Rng sample_rng = rng.split(1);

  // Orthonormal u_0 .. u_m; w_i = 2 (sqrt(s) u_0 + sqrt(1 - s) u_i) gives cos(w_i, w_j) = s.
  const RealMatrix raw = basis_rng.normal_matrix(spec.dim, spec.num_tasks + 1);
  const RealMatrix basis =
      raw.householderQr().householderQ() * RealMatrix::Identity(spec.dim, spec.num_tasks + 1);
  const double shared = std::sqrt(spec.similarity);
  const double own = std::sqrt(1.0 - spec.similarity);

  MtlToyData data;
  for (int i = 0; i < spec.num_tasks; ++i) {
    RealVector truth = 2.0 * (shared * basis.col(0) + own * basis.col(i + 1));
    data.train.push_back(sample_linear(sample_rng, spec.n_train, truth, spec.noise));
    data.val.push_back(sample_linear(sample_rng, spec.n_val, truth, spec.noise));
    data.true_weights.push_back(std::move(truth));
  }
  return data;
}

MtlToy::MtlToy(const MtlToySpec& spec) : MtlToy(make_mtl_data(spec), spec.ridge) {
  spec_ = spec;
}

MtlToy::MtlToy(MtlToyData data, double ridge) : data_(std::move(data)) {
  if (data_.train.empty() || data_.train.size() != data_.val.size()) {
    throw InvalidArgument("mtl_toy: need matching train/val splits per task");
  }
  spec_.num_tasks = static_cast<int>(data_.train.size());
  spec_.dim = static_cast<int>(data_.train.front().x.cols());
  spec_.n_train = static_cast<int>(data_.train.front().x.rows());
  spec_.n_val = static_cast<int>(data_.val.front().x.rows());
  spec_.ridge = ridge;
  for (std::size_t i = 0; i < data_.train.size(); ++i) {
    if (data_.train[i].x.cols() != spec_.dim || data_.val[i].x.cols() != spec_.dim ||
        data_.train[i].x.rows() != spec_.n_train) {
      throw InvalidArgument("mtl_toy: inconsistent task shapes");
    }
  }
  RealMatrix stacked(static_cast<Index>(spec_.num_tasks) * spec_.n_train, spec_.dim);
  for (int i = 0; i < spec_.num_tasks; ++i) {
    stacked.middleRows(static_cast<Index>(i) * spec_.n_train, spec_.n_train) = data_.train[i].x;
  }
  if (stacked.colPivHouseholderQr().rank() < spec_.dim) {
    warnings_.push_back("mtl_toy: stacked training design is rank deficient");
  }
}

double MtlToy::lower_objective(const RealVector& w, const RealVector& alpha) const {
  double value = 0.5 * spec_.ridge * w.squaredNorm();
  for (int i = 0; i < spec_.num_tasks; ++i) {
    value += alpha[i] * mean_squared_loss(data_.train[i], w);
  }
  return value;
}

RealVector MtlToy::lower_grad(const RealVector& w, const RealVector& alpha) const {
  RealVector grad = spec_.ridge * w;
  for (int i = 0; i < spec_.num_tasks; ++i) {
    grad += alpha[i] * mean_squared_loss_grad(data_.train[i], w);
  }
  return grad;
}

double MtlToy::upper_objective(Index i, const RealVector& w, const RealVector&) const {
  return mean_squared_loss(data_.val[static_cast<std::size_t>(i)], w);
}

RealVector MtlToy::upper_grad_lower(Index i, const RealVector& w, const RealVector&) const {
  return mean_squared_loss_grad(data_.val[static_cast<std::size_t>(i)], w);
}

RealVector MtlToy::upper_grad_upper(Index, const RealVector&, const RealVector&) const {
  return RealVector::Zero(spec_.num_tasks);
}

RealVector MtlToy::hvp_ww(const RealVector&, const RealVector& alpha, const RealVector& v) const {
  RealVector out = spec_.ridge * v;
  for (int i = 0; i < spec_.num_tasks; ++i) out += alpha[i] * gram_apply(data_.train[i], v);
  return out;
}

RealVector MtlToy::hvp_aw(const RealVector& w, const RealVector&, const RealVector& v) const {
  RealVector out(spec_.num_tasks);
  for (int i = 0; i < spec_.num_tasks; ++i) {
    out[i] = mean_squared_loss_grad(data_.train[i], w).dot(v);
  }
  return out;
}

std::optional<Box> MtlToy::domain_box() const {
  return Box{RealVector::Zero(spec_.num_tasks), RealVector::Ones(spec_.num_tasks)};
}

// ---------------------------------------------------------------------------------------------
// Meta-learning toy

void MamlToySpec::validate() const {
  if (!(sigma >= 0.0)) throw InvalidArgument("maml_toy: sigma must be >= 0");
  if (tasks < 1 || dim < 1) throw InvalidArgument("maml_toy: tasks and dim must be >= 1");
  if (n_support < 1 || n_query < 1) throw InvalidArgument("maml_toy: empty support/query set");
  if (!(prox > 0.0)) throw InvalidArgument("maml_toy: prox must be > 0");
}

MamlToy::MamlToy(const MamlToySpec& spec) : spec_(spec) {
  spec_.validate();
  Rng rng(spec_.seed);
  Rng task_rng = rng.split(0);
  Rng sample_rng = rng.split(1);
  Rng noise_rng = rng.split(2);
  const RealVector mean = task_rng.normal_vector(spec_.dim);
  for (int j = 0; j < spec_.tasks; ++j) {
    const RealVector truth = mean + 0.5 * task_rng.normal_vector(spec_.dim);
    support_.push_back(sample_linear(sample_rng, spec_.n_support, truth, 0.1));
    RegressionSet clean = sample_linear(sample_rng, spec_.n_query, truth, 0.1);
    RegressionSet noisy = clean;
    noisy.x += spec_.sigma * noise_rng.normal_matrix(spec_.n_query, spec_.dim);
    query_clean_.push_back(std::move(clean));
    query_noisy_.push_back(std::move(noisy));
  }
}

const RegressionSet& MamlToy::query(Index objective, Index task) const {
  const auto& sets = objective == 0 ? query_clean_ : query_noisy_;
  return sets[static_cast<std::size_t>(task)];
}

double MamlToy::lower_objective(const RealVector& w, const RealVector& alpha) const {
  double value = 0.0;
  for (int j = 0; j < spec_.tasks; ++j) {
    const RealVector block = w.segment(Index{j} * spec_.dim, spec_.dim);
    value += mean_squared_loss(support_[j], block) +
             0.5 * spec_.prox * (block - alpha).squaredNorm();
  }
  return value;
}

RealVector MamlToy::lower_grad(const RealVector& w, const RealVector& alpha) const {
  RealVector grad(dim_lower());
  for (int j = 0; j < spec_.tasks; ++j) {
    const RealVector block = w.segment(Index{j} * spec_.dim, spec_.dim);
    grad.segment(Index{j} * spec_.dim, spec_.dim) =
        mean_squared_loss_grad(support_[j], block) + spec_.prox * (block - alpha);
  }
  return grad;
}

double MamlToy::upper_objective(Index i, const RealVector& w, const RealVector&) const {
  double value = 0.0;
  for (int j = 0; j < spec_.tasks; ++j) {
    value += mean_squared_loss(query(i, j), w.segment(Index{j} * spec_.dim, spec_.dim));
  }
  return value / spec_.tasks;
}

RealVector MamlToy::upper_grad_lower(Index i, const RealVector& w, const RealVector&) const {
  RealVector grad(dim_lower());
  for (int j = 0; j < spec_.tasks; ++j) {
    grad.segment(Index{j} * spec_.dim, spec_.dim) =
        mean_squared_loss_grad(query(i, j), w.segment(Index{j} * spec_.dim, spec_.dim)) /
        spec_.tasks;
  }
  return grad;
}

RealVector MamlToy::upper_grad_upper(Index, const RealVector&, const RealVector&) const {
  return RealVector::Zero(spec_.dim);
}

RealVector MamlToy::hvp_ww(const RealVector&, const RealVector&, const RealVector& v) const {
  RealVector out(dim_lower());
  for (int j = 0; j < spec_.tasks; ++j) {
    const RealVector block = v.segment(Index{j} * spec_.dim, spec_.dim);
    out.segment(Index{j} * spec_.dim, spec_.dim) =
        gram_apply(support_[j], block) + spec_.prox * block;
  }
  return out;
}

RealVector MamlToy::hvp_aw(const RealVector&, const RealVector&, const RealVector& v) const {
  RealVector out = RealVector::Zero(spec_.dim);
  for (int j = 0; j < spec_.tasks; ++j) out -= spec_.prox * v.segment(Index{j} * spec_.dim, spec_.dim);
  return out;
}

}  // namespace moml::suite
