#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "moml/cli.hpp"
#include "moml/driver.hpp"
#include "moml/pareto.hpp"
#include "moml/suite.hpp"

namespace py = pybind11;
using namespace moml;

namespace {

// Python subclasses of BilevelProblem. Exceptions raised in Python callbacks are turned into
// moml::Error so the driver records them like any other oracle failure.
class PyBilevelProblem : public BilevelProblem {
 public:
  using BilevelProblem::BilevelProblem;

  std::string name() const override {
    py::gil_scoped_acquire gil;
    py::function override = py::get_override(static_cast<const BilevelProblem*>(this), "name");
    if (override) return call<std::string>(override);
    return "python";
  }
  Index dim_lower() const override { return pure<Index>("dim_lower"); }
  Index dim_upper() const override { return pure<Index>("dim_upper"); }
  Index num_objectives() const override { return pure<Index>("num_objectives"); }
  double lower_objective(const RealVector& w, const RealVector& a) const override {
    return pure<double>("lower_objective", w, a);
  }
  RealVector lower_grad(const RealVector& w, const RealVector& a) const override {
    return pure<RealVector>("lower_grad", w, a);
  }
  double upper_objective(Index i, const RealVector& w, const RealVector& a) const override {
    return pure<double>("upper_objective", i, w, a);
  }
  RealVector upper_grad_lower(Index i, const RealVector& w, const RealVector& a) const override {
    return pure<RealVector>("upper_grad_lower", i, w, a);
  }
  RealVector upper_grad_upper(Index i, const RealVector& w, const RealVector& a) const override {
    return pure<RealVector>("upper_grad_upper", i, w, a);
  }
  bool has_analytic_hvp() const override {
    py::gil_scoped_acquire gil;
    py::function ww = py::get_override(static_cast<const BilevelProblem*>(this), "hvp_ww");
    py::function aw = py::get_override(static_cast<const BilevelProblem*>(this), "hvp_aw");
    return ww && aw;
  }
  RealVector hvp_ww(const RealVector& w, const RealVector& a, const RealVector& v) const override {
    return pure<RealVector>("hvp_ww", w, a, v);
  }
  RealVector hvp_aw(const RealVector& w, const RealVector& a, const RealVector& v) const override {
    return pure<RealVector>("hvp_aw", w, a, v);
  }
  std::optional<Box> domain_box() const override {
    py::gil_scoped_acquire gil;
    py::function override =
        py::get_override(static_cast<const BilevelProblem*>(this), "domain_box");
    if (!override) return std::nullopt;
    return call<std::optional<Box>>(override);
  }

 private:
  template <typename R, typename... Args>
  R call(const py::function& fn, Args&&... args) const {
    try {
      return fn(std::forward<Args>(args)...).template cast<R>();
    } catch (py::error_already_set& e) {
      throw Error(std::string("python callback: ") + e.what());
    } catch (const py::cast_error& e) {
      throw Error(std::string("python callback returned the wrong type: ") + e.what());
    }
  }

  template <typename R, typename... Args>
  R pure(const char* method, Args&&... args) const {
    py::gil_scoped_acquire gil;
    py::function override = py::get_override(static_cast<const BilevelProblem*>(this), method);
    if (!override) throw Error(std::string("BilevelProblem subclass must define ") + method);
    return call<R>(override, std::forward<Args>(args)...);
  }
};

PointSet to_point_set(const std::vector<RealVector>& points,
                      const std::optional<std::vector<RealVector>>& tags) {
  PointSet set;
  set.points = points;
  if (tags) set.tags = *tags;
  set.validate();
  return set;
}

std::string repr_vector(const RealVector& v) {
  std::ostringstream out;
  out << "[";
  for (Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << cli::format_real(v[i]);
  out << "]";
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-objective bi-level optimisation: unrolled hypergradients, MGDA, Pareto tools";

  auto base = py::register_exception<Error>(m, "MomlError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());

  // numerics
  m.def("relative_error", &relative_error, py::arg("a"), py::arg("b"), py::arg("floor") = 1e-12);

  // problem
  py::class_<Box>(m, "Box")
      .def(py::init([](RealVector lower, RealVector upper) {
             Box box{std::move(lower), std::move(upper)};
             box.validate();
             return box;
           }),
           py::arg("lower"), py::arg("upper"))
      .def_readonly("lower", &Box::lower)
      .def_readonly("upper", &Box::upper)
      .def("contains", &Box::contains)
      .def("clamp", &Box::clamp);

  py::enum_<HvpMode>(m, "HvpMode")
      .value("AUTO", HvpMode::kAuto)
      .value("FINITE_DIFFERENCE", HvpMode::kFiniteDifference);

  py::class_<BilevelProblem, PyBilevelProblem>(m, "BilevelProblem")
      .def(py::init<>())
      .def("name", &BilevelProblem::name)
      .def("dim_lower", &BilevelProblem::dim_lower)
      .def("dim_upper", &BilevelProblem::dim_upper)
      .def("num_objectives", &BilevelProblem::num_objectives)
      .def("lower_objective", &BilevelProblem::lower_objective, py::arg("w"), py::arg("alpha"))
      .def("lower_grad", &BilevelProblem::lower_grad, py::arg("w"), py::arg("alpha"))
      .def("upper_objective", &BilevelProblem::upper_objective, py::arg("i"), py::arg("w"),
           py::arg("alpha"))
      .def("upper_grad_lower", &BilevelProblem::upper_grad_lower, py::arg("i"), py::arg("w"),
           py::arg("alpha"))
      .def("upper_grad_upper", &BilevelProblem::upper_grad_upper, py::arg("i"), py::arg("w"),
           py::arg("alpha"))
      .def("has_analytic_hvp", &BilevelProblem::has_analytic_hvp)
      .def("domain_box", &BilevelProblem::domain_box)
      .def("exact_objectives", &BilevelProblem::exact_objectives, py::arg("alpha"));

  m.def("eval_upper", &eval_upper, py::arg("problem"), py::arg("w"), py::arg("alpha"));
  m.def("fd_hvp_ww", &fd_hvp_ww, py::arg("problem"), py::arg("w"), py::arg("alpha"),
        py::arg("v"));
  m.def("fd_hvp_aw", &fd_hvp_aw, py::arg("problem"), py::arg("w"), py::arg("alpha"),
        py::arg("v"));

  // lower_solver and hypergrad
  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("states", &Trajectory::states)
      .def_readonly("step_size", &Trajectory::step_size)
      .def_readonly("alpha", &Trajectory::alpha)
      .def_property_readonly("num_steps", &Trajectory::num_steps)
      .def_property_readonly("final_state", &Trajectory::final_state);

  m.def(
      "solve_lower",
      [](const BilevelProblem& p, const RealVector& alpha, const RealVector& w0, int K,
         double mu) {
        py::gil_scoped_release release;
        return solve_lower(p, alpha, w0, K, mu);
      },
      py::arg("problem"), py::arg("alpha"), py::arg("w0"), py::arg("num_steps"),
      py::arg("step_size"));
  m.def("lower_residual", &lower_residual, py::arg("problem"), py::arg("trajectory"));
  m.def(
      "reverse_hypergrad",
      [](const BilevelProblem& p, const Trajectory& traj, Index i, HvpMode mode) {
        py::gil_scoped_release release;
        return reverse_hypergrad(p, traj, i, mode);
      },
      py::arg("problem"), py::arg("trajectory"), py::arg("objective"),
      py::arg("mode") = HvpMode::kAuto);
  m.def(
      "all_hypergrads",
      [](const BilevelProblem& p, const Trajectory& traj, HvpMode mode) {
        py::gil_scoped_release release;
        return all_hypergrads(p, traj, mode).rows;
      },
      py::arg("problem"), py::arg("trajectory"), py::arg("mode") = HvpMode::kAuto);
  m.def(
      "fd_hypergrad",
      [](const BilevelProblem& p, const RealVector& alpha, const RealVector& w0, int K, double mu,
         Index i, double eps) {
        py::gil_scoped_release release;
        return fd_hypergrad(p, alpha, w0, K, mu, i, eps);
      },
      py::arg("problem"), py::arg("alpha"), py::arg("w0"), py::arg("num_steps"),
      py::arg("step_size"), py::arg("objective"), py::arg("eps") = 1e-5);

  // mgda
  py::class_<QpSolution>(m, "QpSolution")
      .def_property_readonly("weights",
                             [](const QpSolution& s) { return s.weights.values(); })
      .def_readonly("direction", &QpSolution::direction)
      .def_readonly("objective_value", &QpSolution::objective_value)
      .def_readonly("iterations_used", &QpSolution::iterations_used)
      .def_readonly("converged", &QpSolution::converged);

  m.def(
      "project_simplex", [](const RealVector& v) { return project_simplex(v).values(); },
      py::arg("v"));
  m.def(
      "solve_min_norm",
      [](const RealMatrix& g, double tol, int max_iter) {
        return solve_min_norm(g, MinNormOptions{tol, max_iter});
      },
      py::arg("gradients"), py::arg("tol") = 1e-10, py::arg("max_iter") = 10000);
  m.def("solve_two", &solve_two, py::arg("g1"), py::arg("g2"));

  // driver
  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init([](int T, int K, double mu, double nu, bool warm_start, double tol,
                       std::uint64_t seed, HvpMode hvp) {
             SolverConfig c;
             c.outer_iterations = T;
             c.inner_iterations = K;
             c.lower_step = mu;
             c.upper_step = nu;
             c.warm_start = warm_start;
             c.stationarity_tol = tol;
             c.seed = seed;
             c.hvp_mode = hvp;
             c.validate();
             return c;
           }),
           py::arg("T") = 100, py::arg("K") = 10, py::arg("mu") = 0.1, py::arg("nu") = 0.1,
           py::arg("warm_start") = false, py::arg("stationarity_tol") = 0.0,
           py::arg("seed") = 0, py::arg("hvp_mode") = HvpMode::kAuto)
      .def_readwrite("T", &SolverConfig::outer_iterations)
      .def_readwrite("K", &SolverConfig::inner_iterations)
      .def_readwrite("mu", &SolverConfig::lower_step)
      .def_readwrite("nu", &SolverConfig::upper_step)
      .def_readwrite("warm_start", &SolverConfig::warm_start)
      .def_readwrite("stationarity_tol", &SolverConfig::stationarity_tol)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_readwrite("lower_init", &SolverConfig::lower_init)
      .def_readwrite("hvp_mode", &SolverConfig::hvp_mode);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("t", &IterationRecord::t)
      .def_readonly("alpha", &IterationRecord::alpha)
      .def_readonly("objectives", &IterationRecord::objectives)
      .def_readonly("exact_objectives", &IterationRecord::exact_objectives)
      .def_readonly("gamma", &IterationRecord::gamma)
      .def_readonly("direction_norm", &IterationRecord::direction_norm)
      .def_readonly("wall_ms", &IterationRecord::wall_ms);

  py::class_<RunReport>(m, "RunReport")
      .def_readonly("records", &RunReport::records)
      .def_readonly("final_alpha", &RunReport::final_alpha)
      .def_readonly("final_objectives", &RunReport::final_objectives)
      .def_property_readonly("termination",
                             [](const RunReport& r) { return to_string(r.termination); })
      .def_readonly("error_message", &RunReport::error_message)
      .def("__repr__", [](const RunReport& r) {
        return "<RunReport " + to_string(r.termination) + ", " +
               std::to_string(r.records.size()) + " iterations, alpha " +
               repr_vector(r.final_alpha) + ">";
      });

  m.def(
      "run_moml",
      [](const BilevelProblem& p, const SolverConfig& c, const RealVector& alpha0) {
        py::gil_scoped_release release;
        return run_moml(p, c, alpha0);
      },
      py::arg("problem"), py::arg("config"), py::arg("alpha0"));
  m.def(
      "run_scalarized",
      [](const BilevelProblem& p, const SolverConfig& c, const RealVector& alpha0,
         const RealVector& weights) {
        const SimplexWeights w(weights);
        py::gil_scoped_release release;
        return run_scalarized(p, c, alpha0, w);
      },
      py::arg("problem"), py::arg("config"), py::arg("alpha0"), py::arg("weights"));

  // pareto
  py::class_<PointSet>(m, "PointSet")
      .def(py::init(&to_point_set), py::arg("points"), py::arg("tags") = py::none())
      .def_readonly("points", &PointSet::points)
      .def_readonly("tags", &PointSet::tags)
      .def("__len__", &PointSet::size);

  py::enum_<Minimality>(m, "Minimality")
      .value("PARETO", Minimality::kPareto)
      .value("WEAK", Minimality::kWeak);

  m.def("dominates", &dominates, py::arg("l1"), py::arg("l2"));
  m.def("strictly_dominates", &strictly_dominates, py::arg("l1"), py::arg("l2"));
  m.def("minimal_points", &minimal_points, py::arg("set"), py::arg("kind") = Minimality::kPareto);
  m.def("hausdorff", &hausdorff, py::arg("a"), py::arg("b"));
  m.def(
      "simplex_grid",
      [](Index m_objectives, int resolution) {
        std::vector<RealVector> out;
        for (const auto& w : simplex_grid(m_objectives, resolution)) out.push_back(w.values());
        return out;
      },
      py::arg("num_objectives"), py::arg("resolution"));

  py::class_<FrontierResult>(m, "FrontierResult")
      .def_readonly("front", &FrontierResult::front)
      .def_readonly("all_points", &FrontierResult::all_points)
      .def_property_readonly("weights",
                             [](const FrontierResult& r) {
                               std::vector<RealVector> out;
                               for (const auto& w : r.weights) out.push_back(w.values());
                               return out;
                             })
      .def_readonly("failed_runs", &FrontierResult::failed_runs)
      .def_readonly("failures", &FrontierResult::failures);

  m.def(
      "frontier_by_scalarization",
      [](const BilevelProblem& p, const SolverConfig& c, const RealVector& alpha0, int resolution,
         unsigned threads) {
        py::gil_scoped_release release;
        return frontier_by_scalarization(p, c, alpha0, resolution, threads);
      },
      py::arg("problem"), py::arg("config"), py::arg("alpha0"), py::arg("resolution"),
      py::arg("threads") = 0);

  // suite
  m.def("problem_ids", &suite::problem_ids);
  m.def(
      "problem_parameters",
      [](const std::string& id) {
        std::map<std::string, double> out;
        for (const auto& info : suite::problem_parameters(id)) out[info.name] = info.default_value;
        return out;
      },
      py::arg("id"));
  m.def("make_problem", &suite::make_problem, py::arg("id"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("seed") = 0);
  m.def(
      "qb_analytic_front",
      [](const BilevelProblem& p, int samples) {
        const auto* qb = dynamic_cast<const suite::QuadraticBilevel*>(&p);
        if (!qb) throw InvalidArgument("qb_analytic_front: not a quadratic suite problem");
        return suite::qb_analytic_front(qb->spec(), samples);
      },
      py::arg("problem"), py::arg("samples") = 1001);
  m.def(
      "qb_pareto_distance",
      [](const BilevelProblem& p, const RealVector& alpha) {
        const auto* qb = dynamic_cast<const suite::QuadraticBilevel*>(&p);
        if (!qb) throw InvalidArgument("qb_pareto_distance: not a quadratic suite problem");
        return suite::qb_pareto_distance(qb->spec(), alpha);
      },
      py::arg("problem"), py::arg("alpha"));

  py::class_<suite::ArchSizeSpec>(m, "ArchSizeSpec")
      .def(py::init([](Index edges, std::vector<double> op_params, double target) {
             suite::ArchSizeSpec spec{edges, std::move(op_params), target};
             spec.validate();
             return spec;
           }),
           py::arg("num_edges"), py::arg("op_params"), py::arg("target"))
      .def_readonly("num_edges", &suite::ArchSizeSpec::num_edges)
      .def_readonly("op_params", &suite::ArchSizeSpec::op_params)
      .def_readonly("target", &suite::ArchSizeSpec::target);
  m.def("soft_param_count", &suite::soft_param_count, py::arg("spec"), py::arg("logits"));
  m.def("hard_param_count", &suite::hard_param_count, py::arg("spec"), py::arg("logits"));
  m.def("size_loss", &suite::size_loss, py::arg("spec"), py::arg("logits"));

  // cli
  py::class_<cli::RunConfig>(m, "RunConfig")
      .def_readonly("problem", &cli::RunConfig::problem)
      .def_property_readonly("job", [](const cli::RunConfig& c) { return cli::to_string(c.job); })
      .def_readonly("solver", &cli::RunConfig::solver)
      .def_readonly("seeds", &cli::RunConfig::seeds)
      .def_readwrite("output_dir", &cli::RunConfig::output_dir)
      .def_readonly("problem_params", &cli::RunConfig::problem_params);

  m.def(
      "parse_config",
      [](const std::string& text) {
        cli::ParseResult result = cli::parse_config(text);
        if (!result.ok()) {
          std::string message = "invalid config:";
          for (const auto& e : result.errors) message += "\n  " + e;
          throw InvalidArgument(message);
        }
        return *result.config;
      },
      py::arg("text"));
  m.def(
      "execute",
      [](const cli::RunConfig& config) {
        std::ostringstream log;
        int status;
        {
          py::gil_scoped_release release;
          status = cli::execute(config, log);
        }
        return py::make_tuple(status, log.str());
      },
      py::arg("config"));
}
