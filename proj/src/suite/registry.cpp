#include <algorithm>
#include <cmath>
#include <string>

#include "moml/suite.hpp"

namespace moml::suite {

namespace {

const std::vector<ParamInfo> kQuadraticParams = {
    {"lambda", 0.1, "upper-level regulariser weight"},
    {"coupling", 4.0, "scale of B = coupling * I"},
    {"spread", 0.5, "scale of the per-objective centres and anchors"},
};

const std::vector<ParamInfo> kMtlParams = {
    {"tasks", 3, "number of tasks"},
    {"dim", 5, "shared model dimension"},
    {"n_train", 20, "training samples per task"},
    {"n_val", 20, "validation samples per task"},
    {"noise", 0.3, "label noise standard deviation"},
    {"similarity", 0.3, "cosine between task weight vectors"},
    {"ridge", 0.01, "lower-level ridge penalty"},
    {"data_seed", -1, "data seed (-1: use the run seed)"},
};

const std::vector<ParamInfo> kMamlParams = {
    {"sigma", 0.5, "query-input noise scale for the robust objective"},
    {"tasks", 3, "number of tasks"},
    {"dim", 3, "input dimension"},
    {"n_support", 10, "support samples per task"},
    {"n_query", 20, "query samples per task"},
    {"prox", 1.0, "proximal pull towards the shared initialisation"},
    {"data_seed", -1, "data seed (-1: use the run seed)"},
};

const std::vector<ParamInfo> kArchParams = {
    {"edges", 4, "number of edges"},
    {"target", 8.0, "target parameter count L"},
    {"n_train", 40, "training samples"},
    {"n_val", 40, "validation samples"},
    {"noise", 0.1, "label noise"},
    {"ridge", 0.01, "lower-level ridge penalty"},
    {"data_seed", -1, "data seed (-1: use the run seed)"},
};

// Parameter counts of the identity, tanh and square candidate ops.
const std::vector<double> kArchOpParams = {1.0, 4.0, 9.0};

double lookup(const std::map<std::string, double>& params, const std::vector<ParamInfo>& infos,
              const std::string& key) {
  if (auto it = params.find(key); it != params.end()) return it->second;
  for (const auto& info : infos) {
    if (info.name == key) return info.default_value;
  }
  throw InvalidArgument("internal: no parameter " + key);
}

int lookup_int(const std::map<std::string, double>& params, const std::vector<ParamInfo>& infos,
               const std::string& key) {
  const double value = lookup(params, infos, key);
  if (value != std::floor(value)) throw InvalidArgument(key + " must be an integer");
  return static_cast<int>(value);
}

std::uint64_t data_seed(const std::map<std::string, double>& params,
                        const std::vector<ParamInfo>& infos, std::uint64_t run_seed) {
  const double value = lookup(params, infos, "data_seed");
  if (value < 0) return run_seed;
  return static_cast<std::uint64_t>(value);
}

}  // namespace

const std::vector<std::string>& problem_ids() {
  static const std::vector<std::string> ids = {"qb2", "qb3", "mtl_toy", "maml_toy", "arch_size"};
  return ids;
}

bool is_known_problem(const std::string& id) {
  const auto& ids = problem_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

const std::vector<ParamInfo>& problem_parameters(const std::string& id) {
  if (id == "qb2" || id == "qb3") return kQuadraticParams;
  if (id == "mtl_toy") return kMtlParams;
  if (id == "maml_toy") return kMamlParams;
  if (id == "arch_size") return kArchParams;
  throw InvalidArgument("unknown problem id '" + id + "'");
}

std::unique_ptr<BilevelProblem> make_problem(const std::string& id,
                                             const std::map<std::string, double>& params,
                                             std::uint64_t seed) {
  const auto& infos = problem_parameters(id);
  for (const auto& [key, value] : params) {
    const bool known = std::any_of(infos.begin(), infos.end(),
                                   [&](const ParamInfo& info) { return info.name == key; });
    if (!known) throw InvalidArgument("problem " + id + " has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw InvalidArgument("parameter " + key + " must be finite");
  }

  if (id == "qb2" || id == "qb3") {
    const double lambda = lookup(params, infos, "lambda");
    const double coupling = lookup(params, infos, "coupling");
    const double spread = lookup(params, infos, "spread");
    auto spec = id == "qb2" ? qb2_spec(lambda, coupling, spread) : qb3_spec(lambda, coupling, spread);
    return std::make_unique<QuadraticBilevel>(std::move(spec), id);
  }
  if (id == "mtl_toy") {
    MtlToySpec spec;
    spec.num_tasks = lookup_int(params, infos, "tasks");
    spec.dim = lookup_int(params, infos, "dim");
    spec.n_train = lookup_int(params, infos, "n_train");
    spec.n_val = lookup_int(params, infos, "n_val");
    spec.noise = lookup(params, infos, "noise");
    spec.similarity = lookup(params, infos, "similarity");
    spec.ridge = lookup(params, infos, "ridge");
    spec.seed = data_seed(params, infos, seed);
    return std::make_unique<MtlToy>(spec);
  }
  if (id == "maml_toy") {
    MamlToySpec spec;
    spec.sigma = lookup(params, infos, "sigma");
    spec.tasks = lookup_int(params, infos, "tasks");
    spec.dim = lookup_int(params, infos, "dim");
    spec.n_support = lookup_int(params, infos, "n_support");
    spec.n_query = lookup_int(params, infos, "n_query");
    spec.prox = lookup(params, infos, "prox");
    spec.seed = data_seed(params, infos, seed);
    return std::make_unique<MamlToy>(spec);
  }
  ArchToySpec spec;
  spec.size.num_edges = lookup_int(params, infos, "edges");
  spec.size.op_params = kArchOpParams;
  spec.size.target = lookup(params, infos, "target");
  spec.n_train = lookup_int(params, infos, "n_train");
  spec.n_val = lookup_int(params, infos, "n_val");
  spec.noise = lookup(params, infos, "noise");
  spec.ridge = lookup(params, infos, "ridge");
  spec.seed = data_seed(params, infos, seed);
  return std::make_unique<ArchToy>(spec);
}

RealVector random_upper_point(const BilevelProblem& problem, Rng& rng) {
  const Index n = problem.dim_upper();
  if (const auto box = problem.domain_box()) {
    RealVector out(n);
    for (Index j = 0; j < n; ++j) {
      const double width = box->upper[j] - box->lower[j];
      out[j] = rng.uniform(box->lower[j] + 0.1 * width, box->upper[j] - 0.1 * width);
    }
    return out;
  }
  return rng.uniform_vector(n, -1.0, 1.0);
}

}  // namespace moml::suite
