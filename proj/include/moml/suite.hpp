#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "moml/pareto.hpp"
#include "moml/problem.hpp"

namespace moml::suite {

// ---------------------------------------------------------------------------------------------
// Quadratic bi-level family
//
//   f(w, a)   = 1/2 w^T A w - w^T (B a + b)
//   F_i(w, a) = 1/2 ||w - c_i||^2 + lambda/2 ||a - a_i||^2
//
// The lower solution is w*(a) = A^{-1}(B a + b), and every phi_i shares the Hessian
// B^T A^{-2} B + lambda I, so for two objectives the Pareto set is the segment between the
// single-objective minimizers.
// ---------------------------------------------------------------------------------------------

struct QuadraticBilevelSpec {
  RealMatrix A;  // dim_lower x dim_lower, SPD
  RealMatrix B;  // dim_lower x dim_upper
  RealVector b;  // dim_lower
  std::vector<RealVector> centers;  // c_i, dim_lower
  std::vector<RealVector> anchors;  // a_i, dim_upper
  double lambda = 0.0;

  /// Throws InvalidArgument on inconsistent shapes, lambda < 0, or A not SPD.
  void validate() const;
  Index dim_lower() const { return A.rows(); }
  Index dim_upper() const { return B.cols(); }
  Index num_objectives() const { return static_cast<Index>(centers.size()); }
};

/// Two objectives in R^2, mirror-symmetric under swapping coordinates.
QuadraticBilevelSpec qb2_spec(double lambda = 0.1, double coupling = 4.0, double spread = 0.5);
/// Three objectives in R^3 built the same way.
QuadraticBilevelSpec qb3_spec(double lambda = 0.1, double coupling = 4.0, double spread = 0.5);

class QuadraticBilevel final : public BilevelProblem {
 public:
  explicit QuadraticBilevel(QuadraticBilevelSpec spec, std::string name = "qb");

  const QuadraticBilevelSpec& spec() const { return spec_; }

  std::string name() const override { return name_; }
  Index dim_lower() const override { return spec_.dim_lower(); }
  Index dim_upper() const override { return spec_.dim_upper(); }
  Index num_objectives() const override { return spec_.num_objectives(); }
  double lower_objective(const RealVector& w, const RealVector& alpha) const override;
  RealVector lower_grad(const RealVector& w, const RealVector& alpha) const override;
  double upper_objective(Index i, const RealVector& w, const RealVector& alpha) const override;
  RealVector upper_grad_lower(Index i, const RealVector& w,
                              const RealVector& alpha) const override;
  RealVector upper_grad_upper(Index i, const RealVector& w,
                              const RealVector& alpha) const override;
  bool has_analytic_hvp() const override { return true; }
  RealVector hvp_ww(const RealVector& w, const RealVector& alpha,
                    const RealVector& v) const override;
  RealVector hvp_aw(const RealVector& w, const RealVector& alpha,
                    const RealVector& v) const override;
  std::optional<ObjectiveVector> exact_objectives(const RealVector& alpha) const override;

 private:
  QuadraticBilevelSpec spec_;
  std::string name_;
};

/// w*(alpha) = A^{-1}(B alpha + b).
RealVector qb_analytic_lower_opt(const QuadraticBilevelSpec& spec, const RealVector& alpha);
/// phi(alpha) = F(w*(alpha), alpha).
ObjectiveVector qb_analytic_objectives(const QuadraticBilevelSpec& spec, const RealVector& alpha);
/// Minimizer of phi_i alone. Throws InvalidArgument when the shared Hessian is singular.
RealVector qb_objective_minimizer(const QuadraticBilevelSpec& spec, Index i);
/// Shared Hessian of every phi_i.
RealMatrix qb_upper_hessian(const QuadraticBilevelSpec& spec);

/// phi sampled on the Pareto segment between the two single-objective minimizers; tags carry
/// the alphas. Requires two objectives; coincident minimizers give a single point.
PointSet qb_analytic_front(const QuadraticBilevelSpec& spec, int samples = 1001);
/// Euclidean distance from alpha to the analytic Pareto segment (two objectives).
double qb_pareto_distance(const QuadraticBilevelSpec& spec, const RealVector& alpha);

// ---------------------------------------------------------------------------------------------
// Soft parameter count
// ---------------------------------------------------------------------------------------------

/// Every edge picks one of the same candidate operations; op o carries op_params[o] weights.
struct ArchSizeSpec {
  Index num_edges = 1;
  std::vector<double> op_params;
  double target = 1.0;  // L

  void validate() const;
  Index num_ops() const { return static_cast<Index>(op_params.size()); }
};

/// Row-wise softmax of an edges x ops logit matrix.
RealMatrix edge_softmax(const RealMatrix& logits);
/// Sum over edges of the softmax-weighted parameter count.
double soft_param_count(const ArchSizeSpec& spec, const RealMatrix& logits);
/// Sum over edges of the parameter count of the argmax operation.
double hard_param_count(const ArchSizeSpec& spec, const RealMatrix& logits);
/// |soft_param_count - target|.
double size_loss(const ArchSizeSpec& spec, const RealMatrix& logits);
/// Gradient of size_loss with respect to the logits (sign(0) = 0 at the kink).
RealMatrix size_loss_grad(const ArchSizeSpec& spec, const RealMatrix& logits);

// ---------------------------------------------------------------------------------------------
// Loss-weighted multi-task regression
//
//   lower: sum_i alpha_i L(w, D_i^tr) + ridge/2 ||w||^2
//   upper: (L(w, D_1^val), ..., L(w, D_m^val)),  alpha in [0, 1]^m
//
// with L the mean of 1/2 (x^T w - y)^2 over a shared linear model.
// ---------------------------------------------------------------------------------------------

struct MtlToySpec {
  int num_tasks = 3;
  int dim = 5;
  int n_train = 20;
  int n_val = 20;
  double noise = 0.3;
  /// Cosine between any two tasks' true weight vectors, in [0, 1].
  double similarity = 0.3;
  double ridge = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RegressionSet {
  RealMatrix x;  // rows are samples
  RealVector y;
};

struct MtlToyData {
  std::vector<RegressionSet> train;
  std::vector<RegressionSet> val;
  std::vector<RealVector> true_weights;
};

MtlToyData make_mtl_data(const MtlToySpec& spec);

class MtlToy final : public BilevelProblem {
 public:
  explicit MtlToy(const MtlToySpec& spec);
  /// Uses the given splits as-is; total count and dimension come from the data.
  MtlToy(MtlToyData data, double ridge);

  const MtlToyData& data() const { return data_; }
  /// Non-empty when the stacked training design is rank deficient.
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::string name() const override { return "mtl_toy"; }
  Index dim_lower() const override { return spec_.dim; }
  Index dim_upper() const override { return spec_.num_tasks; }
  Index num_objectives() const override { return spec_.num_tasks; }
  double lower_objective(const RealVector& w, const RealVector& alpha) const override;
  RealVector lower_grad(const RealVector& w, const RealVector& alpha) const override;
  double upper_objective(Index i, const RealVector& w, const RealVector& alpha) const override;
  RealVector upper_grad_lower(Index i, const RealVector& w,
                              const RealVector& alpha) const override;
  RealVector upper_grad_upper(Index i, const RealVector& w,
                              const RealVector& alpha) const override;
  bool has_analytic_hvp() const override { return true; }
  RealVector hvp_ww(const RealVector& w, const RealVector& alpha,
                    const RealVector& v) const override;
  RealVector hvp_aw(const RealVector& w, const RealVector& alpha,
                    const RealVector& v) const override;
  std::optional<Box> domain_box() const override;

 private:
  MtlToySpec spec_;
  MtlToyData data_;
  std::vector<std::string> warnings_;
};

/// Mean of 1/2 (x^T w - y)^2 and its gradient.
double mean_squared_loss(const RegressionSet& set, const RealVector& w);
RealVector mean_squared_loss_grad(const RegressionSet& set, const RealVector& w);

// ---------------------------------------------------------------------------------------------
// Two-objective meta-learning toy
//
// alpha is a shared initialisation for `tasks` linear-regression tasks. Each task adapts its
// own block w_j of the lower variable on its support set, tied to alpha by a proximal term:
//
//   f(w, alpha) = sum_j [ L(w_j, S_j) + prox/2 ||w_j - alpha||^2 ]
//   F_1 = mean_j L(w_j, Q_j)          (clean query loss)
//   F_2 = mean_j L(w_j, Q_j + noise)  (query inputs under fixed additive noise of scale sigma)
// ---------------------------------------------------------------------------------------------

struct MamlToySpec {
  double sigma = 0.5;
  int tasks = 3;
  int dim = 3;
  int n_support = 10;
  int n_query = 20;
  double prox = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

class MamlToy final : public BilevelProblem {
 public:
  explicit MamlToy(const MamlToySpec& spec);

  std::string name() const override { return "maml_toy"; }
  Index dim_lower() const override { return Index{spec_.tasks} * spec_.dim; }
  Index dim_upper() const override { return spec_.dim; }
  Index num_objectives() const override { return 2; }
  double lower_objective(const RealVector& w, const RealVector& alpha) const override;
  RealVector lower_grad(const RealVector& w, const RealVector& alpha) const override;
  double upper_objective(Index i, const RealVector& w, const RealVector& alpha) const override;
  RealVector upper_grad_lower(Index i, const RealVector& w,
                              const RealVector& alpha) const override;
  RealVector upper_grad_upper(Index i, const RealVector& w,
                              const RealVector& alpha) const override;
  bool has_analytic_hvp() const override { return true; }
  RealVector hvp_ww(const RealVector& w, const RealVector& alpha,
                    const RealVector& v) const override;
  RealVector hvp_aw(const RealVector& w, const RealVector& alpha,
                    const RealVector& v) const override;

 private:
  const RegressionSet& query(Index objective, Index task) const;

  MamlToySpec spec_;
  std::vector<RegressionSet> support_;
  std::vector<RegressionSet> query_clean_;
  std::vector<RegressionSet> query_noisy_;
};

// ---------------------------------------------------------------------------------------------
// Size-penalised architecture search toy
//
// A one-cell "supernet": edge e mixes fixed feature maps of input coordinate x_e with softmax
// weights p_e(alpha), each candidate op having its own scalar weight w_{e,o}:
//
//   yhat(x) = sum_e sum_o p_{e,o}(alpha) w_{e,o} op_o(x_e)
//
// Lower is the ridge-regularised training loss; upper is (validation loss, size_loss).
// alpha and w are flattened row-major (edge-major).
// ---------------------------------------------------------------------------------------------

struct ArchToySpec {
  ArchSizeSpec size;
  int n_train = 40;
  int n_val = 40;
  double noise = 0.1;
  double ridge = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Candidate ops: identity, tanh, x^2 - 1 zero-mean square (ids 0, 1, 2).
double apply_op(Index op, double x);

class ArchToy final : public BilevelProblem {
 public:
  explicit ArchToy(const ArchToySpec& spec);

  const ArchToySpec& spec() const { return spec_; }

  std::string name() const override { return "arch_size"; }
  Index dim_lower() const override { return spec_.size.num_edges * spec_.size.num_ops(); }
  Index dim_upper() const override { return dim_lower(); }
  Index num_objectives() const override { return 2; }
  double lower_objective(const RealVector& w, const RealVector& alpha) const override;
  RealVector lower_grad(const RealVector& w, const RealVector& alpha) const override;
  double upper_objective(Index i, const RealVector& w, const RealVector& alpha) const override;
  RealVector upper_grad_lower(Index i, const RealVector& w,
                              const RealVector& alpha) const override;
  RealVector upper_grad_upper(Index i, const RealVector& w,
                              const RealVector& alpha) const override;
  bool has_analytic_hvp() const override { return true; }
  RealVector hvp_ww(const RealVector& w, const RealVector& alpha,
                    const RealVector& v) const override;
  RealVector hvp_aw(const RealVector& w, const RealVector& alpha,
                    const RealVector& v) const override;

  RealMatrix logits(const RealVector& alpha) const;

 private:
  // Per-sample op outputs, sample-major: features[s](e, o) = op_o(x_{s,e}).
  struct Dataset {
    std::vector<RealMatrix> features;
    RealVector y;
  };

  double predict(const RealMatrix& probs, const RealMatrix& weights,
                 const RealMatrix& features) const;
  double loss(const Dataset& data, const RealVector& w, const RealVector& alpha) const;
  RealVector loss_grad_w(const Dataset& data, const RealVector& w, const RealVector& alpha) const;
  RealVector loss_grad_alpha(const Dataset& data, const RealVector& w,
                             const RealVector& alpha) const;
  RealMatrix as_matrix(const RealVector& flat) const;
  RealVector flatten(const RealMatrix& m) const;

  ArchToySpec spec_;
  Dataset train_;
  Dataset val_;
};

// ---------------------------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------------------------

struct ParamInfo {
  std::string name;
  double default_value;
  std::string description;
};

/// "qb2", "qb3", "mtl_toy", "maml_toy", "arch_size".
const std::vector<std::string>& problem_ids();
bool is_known_problem(const std::string& id);
/// Overridable parameters of a problem. Throws InvalidArgument for unknown ids.
const std::vector<ParamInfo>& problem_parameters(const std::string& id);

/// Builds a suite problem. Unknown ids or parameter names throw InvalidArgument. Randomly
/// generated data is keyed by `seed` unless a `data_seed` parameter is given.
std::unique_ptr<BilevelProblem> make_problem(const std::string& id,
                                             const std::map<std::string, double>& params = {},
                                             std::uint64_t seed = 0);

/// Random upper-level point for initialisation and gradient checks: uniform over the inner 80%
/// of the domain box when there is one, uniform on [-1, 1] per coordinate otherwise.
RealVector random_upper_point(const BilevelProblem& problem, Rng& rng);

}  // namespace moml::suite
