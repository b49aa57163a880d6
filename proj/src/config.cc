#include "zfo/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <random>
#include <set>

#include "zfo/error.hpp"

namespace zfo {
namespace {

std::string Join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void RequireObject(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError((path.empty() ? std::string("config") : path) + ": expected an object");
}

void RejectUnknown(const Json& j, const std::string& path, std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool found = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
    if (!found) throw ConfigError(Join(path, it.key()) + ": unknown field");
  }
}

const Json* Find(const Json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double Number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + ": must be finite");
  return x;
}

std::int64_t Integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t Unsigned(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(path + ": expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

int SmallInt(const Json& v, const std::string& path, int lo) {
  const std::int64_t x = Integer(v, path);
  if (x < lo || x > std::numeric_limits<int>::max()) {
    throw ConfigError(path + ": must be an integer >= " + std::to_string(lo));
  }
  return static_cast<int>(x);
}

std::string String(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

bool Bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

template <class T, class F>
T Required(const Json& j, const char* key, const std::string& path, F read) {
  const Json* v = Find(j, key);
  if (!v) throw ConfigError(Join(path, key) + ": required");
  return read(*v, Join(path, key));
}

template <class T, class F>
void Optional(const Json& j, const char* key, const std::string& path, T& out, F read) {
  if (const Json* v = Find(j, key)) out = read(*v, Join(path, key));
}

ProblemSpec ParseProblem(const Json& j, const std::string& path) {
  RequireObject(j, path);
  ProblemSpec p;
  p.kind = Required<std::string>(j, "kind", path, String);
  auto positive = [](const Json& v, const std::string& at) { return SmallInt(v, at, 1); };
  Optional(j, "seed", path, p.seed, Unsigned);
  if (p.kind == "routing") {
    RejectUnknown(j, path, {"kind", "seed", "n_groups", "agents_per_group"});
    p.n_groups = 10;
    p.agents_per_group = 6;
    Optional(j, "n_groups", path, p.n_groups, [](const Json& v, const std::string& at) { return SmallInt(v, at, 2); });
    Optional(j, "agents_per_group", path, p.agents_per_group, positive);
  } else if (p.kind == "box_quadratic") {
    RejectUnknown(j, path, {"kind", "seed", "agents", "dim"});
    p.agents = Required<int>(j, "agents", path, positive);
    p.dim = Required<int>(j, "dim", path, positive);
  } else if (p.kind == "trig_sum") {
    RejectUnknown(j, path, {"kind", "seed", "agents", "dim", "terms"});
    p.agents = Required<int>(j, "agents", path, positive);
    p.dim = Required<int>(j, "dim", path, positive);
    p.terms = 3;
    Optional(j, "terms", path, p.terms, positive);
  } else {
    throw ConfigError(Join(path, "kind") + ": unknown problem kind '" + p.kind + "'");
  }
  return p;
}

GraphSpec ParseGraph(const Json& j, const std::string& path) {
  RequireObject(j, path);
  GraphSpec g;
  g.kind = Required<std::string>(j, "kind", path, String);
  auto positive = [](const Json& v, const std::string& at) { return SmallInt(v, at, 1); };
  if (g.kind == "complete" || g.kind == "path") {
    RejectUnknown(j, path, {"kind"});
  } else if (g.kind == "star") {
    RejectUnknown(j, path, {"kind", "center"});
    Optional(j, "center", path, g.center, positive);
  } else if (g.kind == "random") {
    RejectUnknown(j, path, {"kind", "min_degree", "max_degree", "seed"});
    Optional(j, "min_degree", path, g.min_degree, positive);
    Optional(j, "max_degree", path, g.max_degree, positive);
    Optional(j, "seed", path, g.seed, Unsigned);
    if (g.max_degree < g.min_degree) throw ConfigError(Join(path, "max_degree") + ": below min_degree");
  } else if (g.kind == "group_chain") {
    RejectUnknown(j, path, {"kind", "groups", "per_group"});
    Optional(j, "groups", path, g.groups, positive);
    Optional(j, "per_group", path, g.per_group, positive);
  } else if (g.kind == "edges") {
    RejectUnknown(j, path, {"kind", "edges"});
    const std::string at = Join(path, "edges");
    const Json* e = Find(j, "edges");
    if (!e) throw ConfigError(at + ": required");
    if (!e->is_array()) throw ConfigError(at + ": expected an array of [i, j] pairs");
    for (std::size_t k = 0; k < e->size(); ++k) {
      const Json& pair = (*e)[k];
      const std::string here = at + "[" + std::to_string(k) + "]";
      if (!pair.is_array() || pair.size() != 2) throw ConfigError(here + ": expected [i, j]");
      g.edges.emplace_back(SmallInt(pair[0], here + "[0]", 1), SmallInt(pair[1], here + "[1]", 1));
    }
  } else if (g.kind == "file") {
    RejectUnknown(j, path, {"kind", "path"});
    g.path = Required<std::string>(j, "path", path, String);
  } else {
    throw ConfigError(Join(path, "kind") + ": unknown graph kind '" + g.kind + "'");
  }
  return g;
}

DelaySpec ParseDelays(const Json& j, const std::string& path) {
  RequireObject(j, path);
  DelaySpec d;
  d.kind = Required<std::string>(j, "kind", path, String);
  Optional(j, "delta", path, d.delta, [](const Json& v, const std::string& at) { return SmallInt(v, at, 0); });
  if (d.kind == "none") {
    RejectUnknown(j, path, {"kind", "delta"});
  } else if (d.kind == "bernoulli") {
    RejectUnknown(j, path, {"kind", "delta", "p"});
    d.p = Required<double>(j, "p", path, Number);
    if (!(d.p >= 0.0 && d.p < 1.0)) throw ConfigError(Join(path, "p") + ": must be in [0, 1)");
  } else {
    throw ConfigError(Join(path, "kind") + ": expected 'none' or 'bernoulli'");
  }
  return d;
}

void ValidateParams(const ParamSpec& p, const std::string& path) {
  if (p.eta.has_value() == p.eta_fstar.has_value()) {
    throw ConfigError(Join(path, "eta") + ": give exactly one of eta and eta_fstar");
  }
  if (p.eta && !(*p.eta > 0.0)) throw ConfigError(Join(path, "eta") + ": must be positive");
  if (p.eta_fstar && !(*p.eta_fstar > 0.0)) throw ConfigError(Join(path, "eta_fstar") + ": must be positive");
  if (!(p.u > 0.0)) throw ConfigError(Join(path, "u") + ": must be positive");
  if (!(p.delta >= 0.0 && p.delta < 1.0)) throw ConfigError(Join(path, "delta") + ": must be in [0, 1)");
  if (p.T < 0) throw ConfigError(Join(path, "T") + ": must be nonnegative");
  if (p.sigma && p.sigma_fstar) throw ConfigError(Join(path, "sigma") + ": give at most one of sigma and sigma_fstar");
  if (p.sigma && !(*p.sigma >= 0.0)) throw ConfigError(Join(path, "sigma") + ": must be nonnegative");
  if (p.sigma_fstar && !(*p.sigma_fstar >= 0.0)) throw ConfigError(Join(path, "sigma_fstar") + ": must be nonnegative");
}

ParamSpec ParseParams(const Json& j, const std::string& path) {
  RequireObject(j, path);
  RejectUnknown(j, path, {"eta", "eta_fstar", "u", "delta", "T", "sigma", "sigma_fstar"});
  ParamSpec p;
  auto num = [](const Json& v, const std::string& at) { return std::optional<double>(Number(v, at)); };
  Optional(j, "eta", path, p.eta, num);
  Optional(j, "eta_fstar", path, p.eta_fstar, num);
  p.u = Required<double>(j, "u", path, Number);
  Optional(j, "delta", path, p.delta, Number);
  p.T = Required<std::int64_t>(j, "T", path, Integer);
  Optional(j, "sigma", path, p.sigma, num);
  Optional(j, "sigma_fstar", path, p.sigma_fstar, num);
  ValidateParams(p, path);
  return p;
}

Json ProfileJson(const ActionProfile& x) {
  Json out = Json::array();
  for (const Vec& xi : x) out.push_back(std::vector<double>(xi.data(), xi.data() + xi.size()));
  return out;
}

bool NeedsOptimum(const ExperimentConfig& cfg) {
  return cfg.params.eta_fstar || cfg.params.sigma_fstar || cfg.problem.kind == "routing";
}

}  // namespace

ExperimentConfig ParseConfig(const Json& j) {
  RequireObject(j, "");
  RejectUnknown(j, "", {"schema", "problem", "graph", "delays", "params", "mode", "reduced_tables", "seed", "cadence",
                        "f_star", "x0", "history_margin"});
  const std::string schema = Required<std::string>(j, "schema", "", String);
  if (schema != kRunSchema) throw ConfigError("schema: expected '" + std::string(kRunSchema) + "', got '" + schema + "'");
  ExperimentConfig cfg;
  cfg.problem = Required<ProblemSpec>(j, "problem", "", ParseProblem);
  cfg.graph = Required<GraphSpec>(j, "graph", "", ParseGraph);
  if (const Json* d = Find(j, "delays")) cfg.delays = ParseDelays(*d, "delays");
  cfg.params = Required<ParamSpec>(j, "params", "", ParseParams);
  Optional(j, "mode", "", cfg.mode, String);
  ParseEstimatorMode(cfg.mode);
  Optional(j, "reduced_tables", "", cfg.reduced_tables, Bool);
  Optional(j, "seed", "", cfg.seed, Unsigned);
  Optional(j, "cadence", "", cfg.cadence, [](const Json& v, const std::string& at) { return SmallInt(v, at, 1); });
  Optional(j, "f_star", "", cfg.f_star, [](const Json& v, const std::string& at) { return std::optional(Number(v, at)); });
  Optional(j, "history_margin", "", cfg.history_margin,
           [](const Json& v, const std::string& at) { return SmallInt(v, at, 0); });
  if (const Json* x0 = Find(j, "x0")) {
    if (!x0->is_array()) throw ConfigError("x0: expected an array of per-agent vectors");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < x0->size(); ++i) {
      const std::string at = "x0[" + std::to_string(i) + "]";
      const Json& row = (*x0)[i];
      if (!row.is_array()) throw ConfigError(at + ": expected an array of numbers");
      std::vector<double> r;
      for (std::size_t k = 0; k < row.size(); ++k) r.push_back(Number(row[k], at + "[" + std::to_string(k) + "]"));
      rows.push_back(std::move(r));
    }
    cfg.x0 = std::move(rows);
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  return ParseConfig(j);
}

Json ToJson(const ExperimentConfig& cfg) {
  Json j;
  j["schema"] = kRunSchema;
  const ProblemSpec& p = cfg.problem;
  Json pj{{"kind", p.kind}, {"seed", p.seed}};
  if (p.kind == "routing") {
    pj["n_groups"] = p.n_groups;
    pj["agents_per_group"] = p.agents_per_group;
  } else {
    pj["agents"] = p.agents;
    pj["dim"] = p.dim;
    if (p.kind == "trig_sum") pj["terms"] = p.terms;
  }
  j["problem"] = pj;
  const GraphSpec& g = cfg.graph;
  Json gj{{"kind", g.kind}};
  if (g.kind == "star") gj["center"] = g.center;
  if (g.kind == "random") {
    gj["min_degree"] = g.min_degree;
    gj["max_degree"] = g.max_degree;
    gj["seed"] = g.seed;
  }
  if (g.kind == "group_chain") {
    if (g.groups) gj["groups"] = g.groups;
    if (g.per_group) gj["per_group"] = g.per_group;
  }
  if (g.kind == "edges") {
    Json e = Json::array();
    for (auto [a, b] : g.edges) e.push_back({a, b});
    gj["edges"] = e;
  }
  if (g.kind == "file") gj["path"] = g.path;
  j["graph"] = gj;
  Json dj{{"kind", cfg.delays.kind}, {"delta", cfg.delays.delta}};
  if (cfg.delays.kind == "bernoulli") dj["p"] = cfg.delays.p;
  j["delays"] = dj;
  Json par{{"u", cfg.params.u}, {"delta", cfg.params.delta}, {"T", cfg.params.T}};
  if (cfg.params.eta) par["eta"] = *cfg.params.eta;
  if (cfg.params.eta_fstar) par["eta_fstar"] = *cfg.params.eta_fstar;
  if (cfg.params.sigma) par["sigma"] = *cfg.params.sigma;
  if (cfg.params.sigma_fstar) par["sigma_fstar"] = *cfg.params.sigma_fstar;
  j["params"] = par;
  j["mode"] = cfg.mode;
  j["reduced_tables"] = cfg.reduced_tables;
  j["seed"] = cfg.seed;
  j["cadence"] = cfg.cadence;
  j["history_margin"] = cfg.history_margin;
  if (cfg.f_star) j["f_star"] = *cfg.f_star;
  if (cfg.x0) j["x0"] = *cfg.x0;
  return j;
}

std::unique_ptr<Problem> BuildProblem(const ProblemSpec& spec) {
  if (spec.kind == "routing") {
    return std::make_unique<RoutingProblem>(BuildRouting({spec.n_groups, spec.agents_per_group, spec.seed}));
  }
  if (spec.kind == "box_quadratic") return std::make_unique<BoxQuadratic>(spec.agents, spec.dim, spec.seed);
  if (spec.kind == "trig_sum") return std::make_unique<TrigSum>(spec.agents, spec.dim, spec.terms, spec.seed);
  throw ConfigError("problem.kind: unknown problem kind '" + spec.kind + "'");
}

CommGraph BuildGraph(const GraphSpec& spec, const Problem& problem) {
  const int n = problem.n();
  if (spec.kind == "complete") return CommGraph::Complete(n);
  if (spec.kind == "path") return CommGraph::Path(n);
  if (spec.kind == "star") {
    if (spec.center > n) throw ConfigError("graph.center: exceeds the number of agents");
    return CommGraph::Star(n, spec.center - 1);
  }
  if (spec.kind == "random") return CommGraph::RandomConnected(n, spec.min_degree, spec.max_degree, spec.seed);
  if (spec.kind == "group_chain") {
    int groups = spec.groups;
    int per_group = spec.per_group;
    if (groups == 0 || per_group == 0) {
      const auto* routing = dynamic_cast<const RoutingProblem*>(&problem);
      if (!routing) throw ConfigError("graph.groups: required unless the problem is routing");
      if (groups == 0) groups = routing->instance().n_groups;
      if (per_group == 0) per_group = routing->instance().agents_per_group;
    }
    if (groups * per_group != n) throw ConfigError("graph.groups: groups * per_group must equal the number of agents");
    return CommGraph::GroupChain(groups, per_group);
  }
  if (spec.kind == "edges" || spec.kind == "file") {
    std::vector<std::pair<int, int>> edges;
    if (spec.kind == "file") {
      const CommGraph g = CommGraph::FromEdgeListFile(spec.path, n);
      edges = g.edges();
    } else {
      for (auto [a, b] : spec.edges) {
        if (a > n || b > n) throw ConfigError("graph.edges: agent id exceeds " + std::to_string(n));
        edges.emplace_back(a - 1, b - 1);
      }
    }
    CommGraph g(n, std::move(edges));
    if (!g.connected()) throw ConfigError("graph: not connected");
    return g;
  }
  throw ConfigError("graph.kind: unknown graph kind '" + spec.kind + "'");
}

void ApplyOverrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.eta) {
    cfg.params.eta = o.eta;
    cfg.params.eta_fstar.reset();
  }
  if (o.u) cfg.params.u = *o.u;
  if (o.delta) cfg.params.delta = *o.delta;
  if (o.T) cfg.params.T = *o.T;
  if (o.sigma) {
    cfg.params.sigma = o.sigma;
    cfg.params.sigma_fstar.reset();
  }
  if (o.p_drop) {
    if (!(*o.p_drop >= 0.0 && *o.p_drop < 1.0)) throw ConfigError("delays.p: must be in [0, 1)");
    cfg.delays.kind = *o.p_drop > 0.0 ? "bernoulli" : "none";
    cfg.delays.p = *o.p_drop;
  }
  ValidateParams(cfg.params, "params");
}

Experiment Resolve(const ExperimentConfig& cfg) {
  std::unique_ptr<Problem> problem = BuildProblem(cfg.problem);
  CommGraph graph = BuildGraph(cfg.graph, *problem);
  std::optional<double> f_star = cfg.f_star ? cfg.f_star : problem->known_optimum();
  std::optional<SolveResult> oracle;
  if (!f_star && NeedsOptimum(cfg)) {
    if (cfg.problem.kind == "trig_sum") throw ConfigError("params.eta_fstar: trig_sum has no reference optimum");
    oracle = CentralizedSolve(*problem);
    f_star = oracle->f;
  }
  if ((cfg.params.eta_fstar || cfg.params.sigma_fstar) && !(*f_star > 0.0)) {
    throw ConfigError("params.eta_fstar: scaling by f* needs f* > 0");
  }
  RunConfig run;
  run.params.eta = cfg.params.eta ? *cfg.params.eta : *cfg.params.eta_fstar / *f_star;
  run.params.u = cfg.params.u;
  run.params.delta = cfg.params.delta;
  run.params.T = cfg.params.T;
  run.params.sigma = cfg.params.sigma ? *cfg.params.sigma : cfg.params.sigma_fstar ? *cfg.params.sigma_fstar * *f_star : 0.0;
  run.mode = ParseEstimatorMode(cfg.mode);
  run.reduced_tables = cfg.reduced_tables;
  run.delays = cfg.delays.kind == "bernoulli" ? DelayModel::Bernoulli(cfg.delays.p, cfg.delays.delta)
                                              : DelayModel::None(cfg.delays.delta);
  run.seed = cfg.seed;
  run.cadence = cfg.cadence;
  run.f_star = f_star;
  run.history_margin = cfg.history_margin;
  if (cfg.x0) {
    if (static_cast<int>(cfg.x0->size()) != problem->n()) throw ConfigError("x0: one vector per agent required");
    ActionProfile x0;
    for (const auto& row : *cfg.x0) x0.push_back(Eigen::Map<const Vec>(row.data(), static_cast<Eigen::Index>(row.size())));
    run.x0 = std::move(x0);
  }
  return Experiment{cfg, std::move(problem), std::move(graph), run, std::move(oracle)};
}

ProblemConstants ParseConstants(const Json& j) {
  RequireObject(j, "constants");
  RejectUnknown(j, "constants", {"schema", "G", "L", "R_bar", "r_under", "n", "d", "b_frak", "b_bar", "B", "sigma",
                                 "D_bar", "f_gap", "max_gap"});
  if (const Json* s = Find(j, "schema")) {
    if (String(*s, "constants.schema") != kConstantsSchema) {
      throw ConfigError("constants.schema: expected '" + std::string(kConstantsSchema) + "'");
    }
  }
  ProblemConstants c;
  const std::string p = "constants";
  Optional(j, "G", p, c.G, Number);
  Optional(j, "L", p, c.L, Number);
  Optional(j, "R_bar", p, c.R_bar, Number);
  Optional(j, "r_under", p, c.r_under, Number);
  c.n = Required<int>(j, "n", p, [](const Json& v, const std::string& at) { return SmallInt(v, at, 1); });
  c.d = Required<int>(j, "d", p, [](const Json& v, const std::string& at) { return SmallInt(v, at, 1); });
  Optional(j, "b_frak", p, c.b_frak, Number);
  Optional(j, "b_bar", p, c.b_bar, Number);
  Optional(j, "B", p, c.B, [](const Json& v, const std::string& at) { return SmallInt(v, at, 0); });
  Optional(j, "sigma", p, c.sigma, Number);
  Optional(j, "D_bar", p, c.D_bar, Number);
  Optional(j, "f_gap", p, c.f_gap, Number);
  Optional(j, "max_gap", p, c.max_gap, [](const Json& v, const std::string& at) { return std::optional(Number(v, at)); });
  return c;
}

Json ToJson(const ProblemConstants& c) {
  Json j{{"schema", kConstantsSchema}, {"G", c.G},         {"L", c.L},         {"R_bar", c.R_bar},
         {"r_under", c.r_under},       {"n", c.n},         {"d", c.d},         {"b_frak", c.b_frak},
         {"b_bar", c.b_bar},           {"B", c.B},         {"sigma", c.sigma}, {"D_bar", c.D_bar},
         {"f_gap", c.f_gap}};
  if (c.max_gap) j["max_gap"] = *c.max_gap;
  return j;
}

DerivedConstants DeriveConstants(const Experiment& e, int samples) {
  const Problem& problem = *e.problem;
  DerivedConstants out;
  ProblemConstants& c = out.constants;
  c.n = problem.n();
  c.d = problem.total_dim();
  c.sigma = e.run.params.sigma;
  const NetworkStats stats = Stats(e.graph, problem.dims(), e.run.delays.delta);
  c.b_bar = stats.b_bar;
  c.b_frak = stats.b_frak;
  c.B = stats.B;

  double outer_sq = 0.0;
  double inner = std::numeric_limits<double>::infinity();
  bool bounded = true;
  for (const ConvexSet& s : problem.sets()) {
    bounded = bounded && s.bounded();
    if (s.bounded()) outer_sq += s.outer_radius() * s.outer_radius();
    inner = std::min(inner, s.inner_radius());
  }
  if (bounded) {
    c.R_bar = std::sqrt(outer_sq);
    c.r_under = inner;
    c.D_bar = 2.0 * c.R_bar * c.R_bar;
  }

  ActionProfile x0 = e.run.x0.value_or(ActionProfile{});
  if (x0.empty()) {
    for (int d : problem.dims()) x0.push_back(Vec::Zero(d));
  }
  const std::optional<double> f_star = e.run.f_star;

  if (const auto* q = dynamic_cast<const BoxQuadratic*>(&problem)) {
    c.G = *q->lipschitz();
    c.L = *q->smoothness();
    c.R_bar = q->outer_radius();
    c.r_under = q->inner_radius();
    c.D_bar = q->max_divergence();
    c.max_gap = q->max_gap();
    c.f_gap = problem.Objective(x0);
    out.note = "exact";
    return out;
  }
  if (const auto* t = dynamic_cast<const TrigSum*>(&problem)) {
    c.G = *t->lipschitz();
    c.L = *t->smoothness();
    c.f_gap = problem.Objective(x0) - t->lower_bound();
    out.note = "exact bounds; f_gap uses a lower bound on inf f";
    return out;
  }

  // Sampled estimates: largest local gradient norm and largest gradient
  // difference ratio over random feasible points.
  out.estimated = true;
  out.note = "G and L estimated from " + std::to_string(samples) + " sampled feasible points; D_bar = 2 R_bar^2";
  Rng rng = MakeStream(e.config.seed, 0, StreamPurpose::kInstance);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample_point = [&]() {
    ActionProfile x;
    for (std::size_t i = 0; i < problem.sets().size(); ++i) {
      const Vec y = Project(problem.sets()[i], StandardGaussian(problem.dims()[i], rng));
      x.push_back(unit(rng) * y);
    }
    return x;
  };
  auto local_gradients = [&](ActionProfile x) {
    constexpr double h = 1e-6;
    const int n = problem.n();
    Eigen::MatrixXd grads(n, c.d);
    int col = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (Eigen::Index k = 0; k < x[i].size(); ++k, ++col) {
        const double orig = x[i][k];
        x[i][k] = orig + h;
        const std::vector<double> up = problem.LocalCosts(x);
        x[i][k] = orig - h;
        const std::vector<double> down = problem.LocalCosts(x);
        x[i][k] = orig;
        for (int a = 0; a < n; ++a) grads(a, col) = (up[static_cast<std::size_t>(a)] - down[static_cast<std::size_t>(a)]) / (2 * h);
      }
    }
    return grads;
  };
  double g = 0.0;
  double l = 0.0;
  ActionProfile prev = sample_point();
  Eigen::MatrixXd prev_grad = local_gradients(prev);
  for (int s = 0; s < samples; ++s) {
    ActionProfile x = sample_point();
    const Eigen::MatrixXd grad = local_gradients(x);
    g = std::max(g, grad.rowwise().norm().maxCoeff());
    const double dist = (Flatten(x) - Flatten(prev)).norm();
    if (dist > 1e-9) l = std::max(l, (grad - prev_grad).rowwise().norm().maxCoeff() / dist);
    prev = std::move(x);
    prev_grad = grad;
  }
  c.G = g;
  c.L = l;
  c.f_gap = f_star ? problem.Objective(x0) - *f_star : 1.0;
  return out;
}

Json ToJson(const NetworkStats& s) {
  Json b = Json::array();
  for (Eigen::Index i = 0; i < s.b.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < s.b.cols(); ++j) row.push_back(s.b(i, j));
    b.push_back(row);
  }
  return {{"n", s.b.rows()}, {"delta", s.delta}, {"b_bar", s.b_bar}, {"b_frak", s.b_frak}, {"B", s.B}, {"distances", b}};
}

Json ToJson(const ParamPlan& p) {
  return {{"regime", ToString(p.regime)}, {"epsilon", p.epsilon}, {"delta", p.delta},
          {"u", p.u},                     {"eta", p.eta},         {"T", p.T}};
}

Json ToJson(const VerifyReport& r) {
  Json checks = Json::array();
  for (const InequalityCheck& k : r.checks) {
    checks.push_back({{"name", k.name},           {"relation", k.relation}, {"bound", k.bound},
                      {"value", k.value},         {"slack", k.slack},       {"satisfied", k.satisfied},
                      {"equality", k.equality},   {"tight", k.tight}});
  }
  Json second = Json::array();
  for (const SecondOrderTerm& t : r.second_order) {
    second.push_back({{"name", t.name}, {"value", t.value}, {"first_order", t.first_order}, {"ratio", t.ratio},
                      {"exceeds", t.exceeds}});
  }
  return {{"regime", ToString(r.regime)}, {"clean", r.clean()}, {"checks", checks}, {"second_order", second}};
}

Json ToJson(const ScalingReport& r) {
  Json rows = Json::array();
  for (const ScalingRow& row : r.rows) rows.push_back({{"epsilon", row.epsilon}, {"T", row.T}});
  return {{"regime", ToString(r.regime)}, {"exponent", r.exponent}, {"rows", rows}};
}

Json ToJson(const SolveResult& r) {
  return {{"f", r.f},
          {"iterations", r.iterations},
          {"stationarity", r.stationarity},
          {"converged", r.converged},
          {"x", ProfileJson(r.x)}};
}

Json SummaryJson(const RunTrace& trace, const ExperimentConfig& cfg) {
  Json j;
  j["schema"] = "zfo.summary/1";
  j["config"] = ToJson(cfg);
  j["x_bar"] = ProfileJson(trace.x_bar);
  j["f_x_bar"] = trace.f_x_bar;
  j["gap_x_bar"] = trace.gap_x_bar;
  j["mean_grad_sq"] = trace.mean_grad_sq;
  j["ergodic_samples"] = trace.ergodic_samples;
  j["B"] = trace.B;
  j["delta_hat"] = trace.delta_hat;
  j["assumption_clean"] = trace.assumption_clean;
  j["fallbacks"] = trace.fallbacks;
  j["feasibility_violations"] = trace.feasibility_violations;
  j["step_bound_violations"] = trace.step_bound_violations;
  j["finite_difference_gradient"] = trace.finite_difference_gradient;
  j["warnings"] = trace.warnings;
  j["wall_seconds"] = trace.wall_seconds;
  if (!trace.records.empty()) {
    const MetricRecord& last = trace.records.back();
    j["final"] = {{"t", last.t}, {"f", last.f}, {"gap", last.gap}, {"grad_sq", last.grad_sq}};
  }
  return j;
}

}  // namespace zfo
