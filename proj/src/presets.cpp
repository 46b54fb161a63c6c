#include "bamle/presets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bamle {

namespace {

Problem path_problem(std::string name, int N, double eps, double beta,
                     const std::unordered_map<NodeId, double>& terminal) {
  if (N < 2) throw std::invalid_argument("path needs N >= 2");
  std::vector<std::string> labels;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int k = 0; k <= N; ++k) labels.push_back(std::to_string(k));
  for (int k = 0; k < N; ++k) edges.emplace_back(k, k + 1);
  Problem p;
  p.name = std::move(name);
  p.graph = std::make_shared<const BiasedGraph>(BiasedGraph::from_edges(labels, edges, terminal, {}, eps));
  p.beta = beta;
  p.epsilon = eps;
  return p;
}

Problem grid_problem(std::string name, const GridSpec& spec, const BoundaryFn& fn, double beta) {
  Problem p;
  p.name = std::move(name);
  p.grid = std::make_shared<const GridDomain>(spec, fn);
  p.graph = p.grid->shared_graph();
  p.beta = beta;
  p.epsilon = spec.epsilon;
  p.rescale = [name = p.name, spec, fn, beta](double eps) {
    GridSpec s = spec;
    s.h = eps;
    s.epsilon = eps;
    return grid_problem(name, s, fn, beta);
  };
  return p;
}

double positive_cone(double A, double beta, double d) {
  return beta == 0.0 ? A * d : A * -std::expm1(-beta * d) / beta;
}

}  // namespace

BoundaryFn square_boundary(const std::string& name, double beta, double A, double c) {
  if (name == "linear-x") return [](const Point& p) { return p[0]; };
  if (name == "mixed")
    return [](const Point& p) {
      return std::sin(2.0 * std::numbers::pi * p[0]) * (1.0 - p[1]) + p[1] * p[1] - 0.3;
    };
  if (name == "spike")
    return [](const Point& p) {
      return std::abs(p[0] - 0.5) < 1e-9 && std::abs(p[1]) < 1e-9 ? 1.0 : 0.0;
    };
  if (name == "negative") return [](const Point& p) { return -(1.0 + p[0] + p[1] * p[1]); };
  if (name == "cone")
    return [A, beta](const Point& p) { return positive_cone(A, beta, p[0] + p[1]); };
  if (name == "constant") return [c](const Point&) { return c; };
  throw std::invalid_argument("unknown boundary preset '" + name + "'");
}

std::vector<std::string> boundary_names() {
  return {"linear-x", "mixed", "spike", "negative", "cone", "constant"};
}

std::vector<std::string> preset_names() {
  return {"three-node", "path-1d", "cone-1d", "square-2d", "counterexample-ray", "single-terminal"};
}

Problem make_preset(const std::string& name, const PresetOptions& o) {
  if (name == "three-node") {
    const double eps = o.epsilon.value_or(1.0);
    const double beta = o.beta.value_or(std::log(2.0) / eps);
    Problem p;
    p.name = name;
    p.graph = std::make_shared<const BiasedGraph>(BiasedGraph::from_edges(
        {"p", "x", "q"}, {{0, 1}, {1, 2}}, {{0, o.p.value_or(1.0)}, {2, o.q.value_or(0.0)}}, {}, eps));
    p.beta = beta;
    p.epsilon = eps;
    return p;
  }
  if (name == "path-1d" || name == "single-terminal") {
    const bool single = name == "single-terminal";
    const int N = o.N.value_or(single ? 10 : 50);
    const double eps = o.epsilon.value_or(1.0);
    const double beta = o.beta.value_or(single ? 1.0 : 0.1);
    std::unordered_map<NodeId, double> term{{0, o.lo.value_or(0.0)}};
    if (!single) term[N] = o.hi.value_or(1.0);
    Problem p = path_problem(name, N, eps, beta, term);
    p.rescale = [name, N, beta, term](double e) { return path_problem(name, N, e, beta, term); };
    return p;
  }
  if (name == "cone-1d") {
    const double eps = o.epsilon.value_or(0.05);
    const int N = o.N.value_or(200);
    const double beta = o.beta.value_or(1.0);
    const double A = o.A.value_or(1.0);
    GridSpec spec;
    spec.dim = 1;
    spec.extent = {N * eps, 0.0};
    spec.h = eps;
    spec.epsilon = eps;
    return grid_problem(name, spec, [A, beta](const Point& x) { return positive_cone(A, beta, x[0]); },
                        beta);
  }
  if (name == "square-2d") {
    const int n = o.n.value_or(20);
    if (n < 2) throw std::invalid_argument("square-2d needs n >= 2");
    const double beta = o.beta.value_or(1.0);
    GridSpec spec;
    spec.dim = 2;
    spec.extent = {1.0, 1.0};
    spec.h = o.epsilon.value_or(1.0 / n);
    spec.epsilon = spec.h;
    auto fn = square_boundary(o.boundary, beta, o.A.value_or(1.0), o.c.value_or(0.5));
    return grid_problem(name, spec, fn, beta);
  }
  if (name == "counterexample-ray") {
    const int N = o.N.value_or(20);
    const double a = o.a.value_or(0.5);
    if (N < 2) throw std::invalid_argument("counterexample-ray needs N >= 2");
    std::vector<std::string> labels{"(0,1)", "(-1,0)"};
    for (int x = 0; x <= N; ++x) labels.push_back("(" + std::to_string(x) + ",0)");
    std::vector<std::pair<NodeId, NodeId>> edges{{0, 2}, {1, 2}};
    for (int x = 0; x < N; ++x) edges.emplace_back(2 + x, 3 + x);
    std::unordered_map<NodeId, double> term{
        {0, 1.0}, {1, -2.0}, {static_cast<NodeId>(2 + N), a * (1.0 - std::ldexp(1.0, -N))}};
    Problem p;
    p.name = name;
    p.graph = std::make_shared<const BiasedGraph>(BiasedGraph::from_edges(labels, edges, term));
    p.beta = std::log(2.0);  // rho = 2 with unit edges
    p.epsilon = 1.0;
    return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<double> counterexample_field(const BiasedGraph& ray, double a) {
  std::vector<double> u(ray.size(), 0.0);
  for (NodeId v = 0; v < ray.size(); ++v) {
    const auto& lbl = ray.label(v);
    if (lbl == "(0,1)") u[v] = 1.0;
    else if (lbl == "(-1,0)") u[v] = -2.0;
    else {
      const int x = std::stoi(lbl.substr(1, lbl.find(',') - 1));
      u[v] = a * (1.0 - std::ldexp(1.0, -x));
    }
  }
  return u;
}

std::vector<CorpusEntry> corpus() {
  std::vector<CorpusEntry> out;
  auto add = [&](std::string label, const std::string& preset, PresetOptions o) {
    out.push_back({std::move(label), make_preset(preset, o)});
  };
  add("three-node", "three-node", {});
  PresetOptions slow;
  slow.beta = 0.1;
  add("path-1d-beta0.1", "path-1d", slow);
  PresetOptions fast;
  fast.beta = 1.0;
  add("path-1d-beta1", "path-1d", fast);
  PresetOptions mixed_path;
  mixed_path.N = 10;
  mixed_path.beta = 0.5;
  mixed_path.lo = -1.0;
  mixed_path.hi = 2.0;
  add("path-11-mixed", "path-1d", mixed_path);
  add("cone-1d", "cone-1d", {});
  for (const auto& b : boundary_names()) {
    PresetOptions o;
    o.boundary = b;
    add("square-2d-" + b, "square-2d", o);
  }
  PresetOptions ray;
  ray.a = 0.5;
  ray.N = 20;
  add("counterexample-ray", "counterexample-ray", ray);
  return out;
}

}  // namespace bamle
