#include <doctest.h>

#include <cmath>

#include "moml/driver.hpp"
#include "moml/suite.hpp"
#include "test_support.hpp"

using namespace moml;
using namespace moml::suite;
using moml::testing::vec;

namespace {

QuadraticBilevelSpec simple_spec(RealMatrix A, RealMatrix B, RealVector b) {
  QuadraticBilevelSpec spec;
  spec.A = std::move(A);
  spec.B = std::move(B);
  spec.b = std::move(b);
  spec.centers = {vec({1, 0}), vec({0, 1})};
  spec.anchors = {vec({0, 0}), vec({0, 0})};
  spec.lambda = 0.1;
  return spec;
}

// Independent softmax-weighted count, one edge per row.
double oracle_soft_count(const std::vector<double>& n, const RealMatrix& logits) {
  double total = 0.0;
  for (Index e = 0; e < logits.rows(); ++e) {
    const double top = logits.row(e).maxCoeff();
    double z = 0.0, acc = 0.0;
    for (Index o = 0; o < logits.cols(); ++o) {
      const double p = std::exp(logits(e, o) - top);
      z += p;
      acc += p * n[static_cast<std::size_t>(o)];
    }
    total += acc / z;
  }
  return total;
}

SolverConfig config(int T, int K, double mu, double nu) {
  SolverConfig c;
  c.outer_iterations = T;
  c.inner_iterations = K;
  c.lower_step = mu;
  c.upper_step = nu;
  return c;
}

}  // namespace

TEST_CASE("qb_analytic_lower_opt examples") {
  const auto identity = simple_spec(RealMatrix::Identity(2, 2), RealMatrix::Identity(2, 2),
                                    RealVector::Zero(2));
  CHECK((qb_analytic_lower_opt(identity, vec({0.3, -2})) - vec({0.3, -2})).norm() <= 1e-15);

  const auto decoupled =
      simple_spec(RealMatrix::Identity(2, 2) * 3, RealMatrix::Zero(2, 2), vec({3, 6}));
  CHECK(qb_analytic_lower_opt(decoupled, vec({5, 5})) == qb_analytic_lower_opt(decoupled, vec({-1, 9})));

  RealMatrix A = RealMatrix::Zero(2, 2);
  A.diagonal() << 2, 4;
  const auto diag = simple_spec(A, RealMatrix::Identity(2, 2), vec({2, 4}));
  CHECK((qb_analytic_lower_opt(diag, vec({0, 0})) - vec({1, 1})).norm() <= 1e-15);
}

TEST_CASE("quadratic specs are validated") {
  auto spec = qb2_spec();
  spec.A(0, 0) = -1;
  CHECK_THROWS_AS(QuadraticBilevel{spec}, InvalidArgument);
  spec = qb2_spec();
  spec.anchors.pop_back();
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  CHECK_THROWS_AS(qb2_spec(-1.0), InvalidArgument);
}

TEST_CASE("QB2 has the documented spectra") {
  const auto spec = qb2_spec();
  const Eigen::SelfAdjointEigenSolver<RealMatrix> lower(spec.A);
  CHECK(lower.eigenvalues()[0] == doctest::Approx(4.0));
  CHECK(lower.eigenvalues()[1] == doctest::Approx(6.0));
  const Eigen::SelfAdjointEigenSolver<RealMatrix> upper(qb_upper_hessian(spec));
  CHECK(upper.eigenvalues()[0] == doctest::Approx(16.0 / 36.0 + 0.1));
  CHECK(upper.eigenvalues()[1] == doctest::Approx(1.1));
}

TEST_CASE("analytic objectives match the sampled lower solution") {
  const auto spec = qb3_spec();
  const QuadraticBilevel problem(spec);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const RealVector alpha = rng.uniform_vector(3, -1, 1);
    const Trajectory traj = solve_lower(problem, alpha, RealVector::Zero(3), 400, 0.15);
    CHECK(relative_error(eval_upper(problem, traj.final_state(), alpha),
                         qb_analytic_objectives(spec, alpha)) <= 1e-12);
    CHECK(*problem.exact_objectives(alpha) == qb_analytic_objectives(spec, alpha));
  }
}

TEST_CASE("lower iterates obey the linear-rate bound") {
  const auto spec = qb2_spec();
  const QuadraticBilevel problem(spec);
  const double mu = 0.1;
  const double rate = 1.0 - mu * 4.0;
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const RealVector alpha = rng.uniform_vector(2, -1, 1);
    const RealVector w0 = rng.normal_vector(2);
    const RealVector star = qb_analytic_lower_opt(spec, alpha);
    const Trajectory traj = solve_lower(problem, alpha, w0, 30, mu);
    for (int k = 0; k <= 30; ++k) {
      CHECK((traj.states[static_cast<std::size_t>(k)] - star).norm() <=
            std::pow(rate, k) * (w0 - star).norm() + 1e-10);
    }
  }
}

TEST_CASE("analytic front properties") {
  const auto spec = qb2_spec();
  const PointSet front = qb_analytic_front(spec, 201);
  REQUIRE(front.size() == 201);

  PointSet mirrored;
  for (const auto& p : front.points) mirrored.add(vec({p[1], p[0]}));
  CHECK(hausdorff(front, mirrored) <= 1e-12);

  // Endpoints carry each objective's own minimum, and no sample beats it.
  for (Index i = 0; i < 2; ++i) {
    const RealVector star = qb_objective_minimizer(spec, i);
    const double best = qb_analytic_objectives(spec, star)[i];
    const auto& endpoint = i == 0 ? front.points.front() : front.points.back();
    CHECK(endpoint[i] == doctest::Approx(best).epsilon(1e-14));
    // Gradient of phi_i vanishes at its minimiser.
    const RealVector grad = testing::numeric_gradient(
        [&](const RealVector& a) { return qb_analytic_objectives(spec, a)[i]; }, star);
    CHECK(grad.norm() <= 1e-8);
    for (const auto& p : front.points) CHECK(p[i] >= best - 1e-14);
  }
  CHECK(minimal_points(front).size() == front.size());

  // Identical objectives collapse the front to a point.
  auto same = spec;
  same.centers[1] = same.centers[0];
  same.anchors[1] = same.anchors[0];
  CHECK(qb_analytic_front(same).size() == 1);
  CHECK_THROWS_AS(qb_analytic_front(qb3_spec()), InvalidArgument);
}

TEST_CASE("soft parameter count examples") {
  ArchSizeSpec spec{1, {100, 50, 10}, 50};
  RealMatrix logits(1, 3);
  logits << 10, 0, 0;
  const double expected = oracle_soft_count(spec.op_params, logits);
  CHECK(expected == doctest::Approx(99.99364).epsilon(1e-7));
  CHECK(soft_param_count(spec, logits) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(size_loss(spec, logits) == doctest::Approx(expected - 50).epsilon(1e-14));
  CHECK(hard_param_count(spec, logits) == 100);

  ArchSizeSpec mean{1, {3, 6, 9}, 6};
  const RealMatrix uniform = RealMatrix::Zero(1, 3);
  CHECK(soft_param_count(mean, uniform) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(size_loss(mean, uniform) <= 1e-14);

  ArchSizeSpec flat{4, {7, 7}, 1};
  Rng rng(2);
  CHECK(soft_param_count(flat, 5.0 * rng.normal_matrix(4, 2)) ==
        doctest::Approx(28.0).epsilon(1e-14));
  CHECK_THROWS_AS(soft_param_count(flat, RealMatrix::Zero(3, 2)), DimensionError);
}

TEST_CASE("soft count matches the oracle and its gradient") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Index edges = 1 + trial % 4;
    ArchSizeSpec spec{edges, {1, 4, 9, 0}, 0};
    spec.target = 0.5 * oracle_soft_count(spec.op_params, RealMatrix::Zero(edges, 4)) +
                  rng.uniform(-3, 3);
    const RealMatrix logits = 2.0 * rng.normal_matrix(edges, 4);
    CHECK(soft_param_count(spec, logits) ==
          doctest::Approx(oracle_soft_count(spec.op_params, logits)).epsilon(1e-13));
    const RealMatrix grad = size_loss_grad(spec, logits);
    const auto as_matrix = [&](const RealVector& flat) {
      return RealMatrix(Eigen::Map<const RealMatrix>(flat.data(), edges, 4));
    };
    const RealVector flat = Eigen::Map<const RealVector>(logits.data(), logits.size());
    const RealVector numeric = testing::numeric_gradient(
        [&](const RealVector& x) { return size_loss(spec, as_matrix(x)); }, flat);
    CHECK(relative_error(Eigen::Map<const RealVector>(grad.data(), grad.size()), numeric) <=
          1e-6);
  }
}

TEST_CASE("soft count tends to the hard count as the margin grows") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Index edges = 1 + trial % 6;
    const Index ops = 2 + trial % 5;
    ArchSizeSpec spec{edges, {}, 1};
    // Counts within a factor of 20; with unbounded ratios a tiny winner is swamped by the tail.
    for (Index o = 0; o < ops; ++o) spec.op_params.push_back(std::floor(rng.uniform(10, 200)));
    RealMatrix logits = rng.normal_matrix(edges, ops);
    for (Index e = 0; e < edges; ++e) {
      const Index win = static_cast<Index>(rng.uniform() * ops);
      double runner_up = -1e300;
      for (Index o = 0; o < ops; ++o) {
        if (o != win) runner_up = std::max(runner_up, logits(e, o));
      }
      logits(e, win) = runner_up + 10.0 + rng.uniform(0, 5);
    }
    const double hard = hard_param_count(spec, logits);
    CHECK(std::abs(soft_param_count(spec, logits) - hard) <= 1e-2 * hard);
  }
}

TEST_CASE("mtl lower objective is the weighted training loss") {
  const MtlToy problem(MtlToySpec{});
  const auto& data = problem.data();
  Rng rng(4);
  const RealVector w = rng.normal_vector(5);
  const RealVector ones = RealVector::Ones(3);
  double ew = 0.0;
  for (const auto& set : data.train) ew += mean_squared_loss(set, w);
  CHECK(problem.lower_objective(w, ones) ==
        doctest::Approx(ew + 0.005 * w.squaredNorm()).epsilon(1e-13));
  for (Index i = 0; i < 3; ++i) {
    CHECK(problem.upper_objective(i, w, ones) ==
          doctest::Approx(mean_squared_loss(data.val[static_cast<std::size_t>(i)], w)));
  }
  const Box box = *problem.domain_box();
  CHECK(box.lower == RealVector::Zero(3));
  CHECK(box.upper == RealVector::Ones(3));
  CHECK(problem.warnings().empty());
}

TEST_CASE("mtl data follows the requested task similarity") {
  MtlToySpec spec;
  spec.similarity = 0.6;
  const MtlToyData data = make_mtl_data(spec);
  REQUIRE(data.true_weights.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double cosine = data.true_weights[i].dot(data.true_weights[j]) /
                            (data.true_weights[i].norm() * data.true_weights[j].norm());
      CHECK(cosine == doctest::Approx(0.6).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(make_mtl_data(MtlToySpec{3, 2}), InvalidArgument);
}

TEST_CASE("identical mtl tasks keep alpha symmetric") {
  MtlToySpec spec;
  spec.num_tasks = 2;
  MtlToyData data = make_mtl_data(spec);
  data.train[1] = data.train[0];
  data.val[1] = data.val[0];
  const MtlToy problem(data, 0.01);
  const RunReport report = run_moml(problem, config(40, 10, 0.1, 0.5), vec({0.6, 0.6}));
  REQUIRE(report.termination != Termination::kError);
  for (const auto& rec : report.records) CHECK(rec.alpha[0] == rec.alpha[1]);
}

TEST_CASE("rank-deficient mtl data is flagged") {
  MtlToySpec spec;
  MtlToyData data = make_mtl_data(spec);
  for (auto& set : data.train) set.x.col(4).setZero();
  const MtlToy problem(data, 0.0);
  CHECK_FALSE(problem.warnings().empty());
}

TEST_CASE("meta-learning toy without noise has coinciding objectives") {
  MamlToySpec spec;
  spec.sigma = 0.0;
  const MamlToy problem(spec);
  Rng rng(6);
  const RealVector alpha = rng.normal_vector(3);
  const RealVector w = rng.normal_vector(9);
  CHECK(problem.upper_objective(0, w, alpha) == problem.upper_objective(1, w, alpha));
  const Trajectory traj = solve_lower(problem, alpha, RealVector::Zero(9), 10, 0.1);
  const HyperGradients grads = all_hypergrads(problem, traj);
  const QpSolution qp = solve_min_norm(grads.rows);
  CHECK((qp.direction - grads.row(0)).norm() <= 1e-14 * (1 + grads.row(0).norm()));
}

TEST_CASE("meta-learning MOML lands on the scalarization frontier") {
  MamlToySpec spec;
  spec.sigma = 1.5;
  const MamlToy problem(spec);
  SolverConfig c = config(800, 10, 0.1, 0.3);
  c.stationarity_tol = 1e-8;
  const RealVector alpha0 = RealVector::Zero(3);

  const RunReport clean = run_scalarized(problem, c, alpha0, SimplexWeights::vertex(2, 0));
  const RunReport robust = run_scalarized(problem, c, alpha0, SimplexWeights::vertex(2, 1));
  CHECK((clean.final_alpha - robust.final_alpha).norm() > 1e-2);

  const RunReport moml = run_moml(problem, c, alpha0);
  const FrontierResult frontier = frontier_by_scalarization(problem, c, alpha0, 41);
  for (const auto& p : frontier.all_points.points) {
    CHECK_FALSE(dominates(p, moml.final_objectives - RealVector::Constant(2, 1e-6)));
  }
  CHECK(moml.final_objectives[0] >= clean.final_objectives[0] - 1e-9);
  CHECK(moml.final_objectives[1] >= robust.final_objectives[1] - 1e-9);
}

TEST_CASE("suite problems are deterministic in their seed") {
  for (const auto& id : problem_ids()) {
    const auto a = make_problem(id, {}, 17);
    const auto b = make_problem(id, {}, 17);
    Rng rng(1);
    const RealVector alpha = random_upper_point(*a, rng);
    const RealVector w = RealVector::Constant(a->dim_lower(), 0.3);
    CHECK(eval_upper(*a, w, alpha) == eval_upper(*b, w, alpha));
    CHECK(a->lower_objective(w, alpha) == b->lower_objective(w, alpha));
  }
  const auto x = make_problem("mtl_toy", {}, 1);
  const auto y = make_problem("mtl_toy", {}, 2);
  const RealVector w = RealVector::Constant(5, 0.3);
  CHECK(x->lower_objective(w, RealVector::Ones(3)) != y->lower_objective(w, RealVector::Ones(3)));
  const auto pinned = make_problem("mtl_toy", {{"data_seed", 1}}, 2);
  CHECK(x->lower_objective(w, RealVector::Ones(3)) ==
        pinned->lower_objective(w, RealVector::Ones(3)));
}

TEST_CASE("registry") {
  CHECK(problem_ids().size() == 5);
  CHECK(is_known_problem("arch_size"));
  CHECK_FALSE(is_known_problem("qb4"));
  CHECK_THROWS_AS(make_problem("qb4"), InvalidArgument);
  CHECK_THROWS_AS(make_problem("qb2", {{"bogus", 1}}), InvalidArgument);
  CHECK_THROWS_AS(make_problem("mtl_toy", {{"tasks", 2.5}}), InvalidArgument);
  const auto arch = make_problem("arch_size", {{"edges", 2}});
  CHECK(arch->dim_upper() == 6);
  CHECK(arch->num_objectives() == 2);
  const auto qb = make_problem("qb2", {{"lambda", 0.5}});
  CHECK(dynamic_cast<const QuadraticBilevel&>(*qb).spec().lambda == 0.5);

  Rng rng(0);
  const auto mtl = make_problem("mtl_toy");
  for (int k = 0; k < 100; ++k) {
    const RealVector p = random_upper_point(*mtl, rng);
    CHECK((p.array() >= 0.1).all());
    CHECK((p.array() <= 0.9).all());
  }
}

TEST_CASE("apply_op") {
  CHECK(apply_op(0, -2.0) == -2.0);
  CHECK(apply_op(1, 0.5) == std::tanh(0.5));
  CHECK(apply_op(2, 3.0) == 8.0);
  CHECK_THROWS_AS(apply_op(3, 1.0), InvalidArgument);
}
