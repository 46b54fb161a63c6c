#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bamle/dp_solver.hpp"
#include "bamle/presets.hpp"
#include "bamle/slope_calculus.hpp"
#include "oracles.hpp"

using namespace bamle;

namespace {

GridDomain line(double h, int n, const BoundaryFn& fn) {
  GridSpec s;
  s.dim = 1;
  s.extent = {n * h, 0.0};
  s.h = h;
  s.epsilon = h;
  return GridDomain(s, fn);
}

std::vector<double> sample(const GridDomain& grid, const std::function<double(double)>& fn) {
  std::vector<double> u(grid.graph().size());
  for (NodeId x = 0; x < u.size(); ++x) u[x] = fn(grid.coord(x)[0]);
  return u;
}

std::vector<NodeId> all_nodes(const BiasedGraph& g) {
  std::vector<NodeId> v(g.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST_CASE("exp_slope on two nodes") {
  auto g = BiasedGraph::from_edges({"x", "y"}, {{0, 1}}, {{0, 0.0}, {1, 1.0}});
  std::vector<NodeId> E{0, 1};
  std::vector<double> u{0.0, 1.0 - std::exp(-1.0)};
  auto r = exp_slope(u, E, 1.0, g);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.witness == std::array<NodeId, 2>{0, 1});
  CHECK(slope_quotient(u[r.witness[0]], u[r.witness[1]], 1.0, 1.0) ==
        doctest::Approx(r.value).epsilon(1e-12));

  std::vector<double> v{0.0, 2.0};
  CHECK(exp_slope(v, E, 0.0, g).value == 2.0);
}

TEST_CASE("exp_slope of constants and singletons") {
  auto grid = line(0.1, 10, [](const Point&) { return 3.0; });
  const auto& g = grid.graph();
  std::vector<double> u(g.size(), 3.0);
  auto E = all_nodes(g);
  CHECK(exp_slope(u, E, 1.0, g).value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(exp_slope(u, E, 0.5, g).value == doctest::Approx(1.5).epsilon(1e-12));
  std::vector<NodeId> one{4};
  CHECK(exp_slope(u, one, 2.0, g).value == 6.0);
  std::vector<NodeId> none;
  CHECK_THROWS_AS(exp_slope(u, none, 1.0, g), std::invalid_argument);
}

TEST_CASE("exp_slope agrees with brute force on a random field") {
  auto grid = line(0.05, 30, [](const Point& p) { return p[0]; });
  const auto& g = grid.graph();
  std::vector<double> u(g.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(1.7 * i) + 0.1 * i;
  auto E = all_nodes(g);
  for (double beta : {0.0, 0.3, 2.0}) {
    const double ref = oracle::brute_slope(u, E, beta, [&](auto a, auto b) {
      return std::abs(grid.coord(a)[0] - grid.coord(b)[0]);
    });
    CHECK(exp_slope(u, E, beta, g).value == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("local slope of a positive cone is its slope A") {
  const double A = 1.5, beta = 1.0;
  auto grid = line(0.1, 20, [&](const Point& p) { return oracle::positive_cone(A, beta, p[0]); });
  auto u = sample(grid, [&](double x) { return oracle::positive_cone(A, beta, x); });
  for (int i = 1; i < 20; ++i) {
    auto r = local_slope(u, *grid.node_at(i), beta, grid.graph());
    CHECK(r.value == doctest::Approx(A).epsilon(1e-12));
  }
}

TEST_CASE("local slope of constant and linear fields") {
  auto grid = line(0.1, 10, [](const Point&) { return 2.0; });
  std::vector<double> c(grid.graph().size(), 2.0);
  CHECK(local_slope(c, *grid.node_at(5), 0.7, grid.graph()).value ==
        doctest::Approx(1.4).epsilon(1e-12));
  CHECK_THROWS_AS(local_slope(c, *grid.node_at(0), 0.7, grid.graph()), std::invalid_argument);

  // u(x) = x: the one-hop quotient is beta h/(1 - e^{-beta h}) + beta u(y),
  // which tends to 1 + u(y) as h shrinks.
  for (double h : {0.1, 0.01, 0.001}) {
    const int n = static_cast<int>(std::lround(1.0 / h));
    auto g = line(h, n, [](const Point& p) { return p[0]; });
    auto u = sample(g, [](double x) { return x; });
    const NodeId y = *g.node_at(n / 2);
    const double exact = oracle::pair_quotient(u[y], u[y] + h, h, 1.0);
    const double s = local_slope(u, y, 1.0, g.graph()).value;
    CHECK(s == doctest::Approx(exact).epsilon(1e-10));
    CHECK(std::abs(s - (1.0 + u[y])) <= 0.51 * h);
  }
}

TEST_CASE("S+ and S- on constants") {
  auto grid = line(0.1, 10, [](const Point&) { return -1.0; });
  std::vector<double> u(grid.graph().size(), -1.0);
  const NodeId y = *grid.node_at(5);
  for (double r : {0.1, 0.2, 0.3, 0.4}) {
    CHECK(s_plus(u, y, r, 2.0, grid.graph()).value == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(s_minus(u, y, r, 2.0, grid.graph()).value == doctest::Approx(-2.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(s_plus(u, y, 0.5, 2.0, grid.graph()), std::invalid_argument);
  CHECK_THROWS_AS(s_minus(u, y, 0.0, 2.0, grid.graph()), std::invalid_argument);
}

TEST_CASE("S+ on a cone equals the quotient at w = y + r") {
  const double A = 1.0, beta = 1.0;
  auto grid = line(0.05, 40, [&](const Point& p) { return oracle::positive_cone(A, beta, p[0]); });
  auto u = sample(grid, [&](double x) { return oracle::positive_cone(A, beta, x); });
  const NodeId y = *grid.node_at(15);
  const double yx = grid.coord(y)[0];
  for (int k = 1; k <= 4; ++k) {
    const double r = k * 0.05;
    const double uw = oracle::positive_cone(A, beta, yx + r);
    const double uy = oracle::positive_cone(A, beta, yx);
    const double ref = beta * (uw - std::exp(-beta * r) * uy) / (1.0 - std::exp(-beta * r));
    auto rep = s_plus(u, y, r, beta, grid.graph());
    CHECK(rep.value == doctest::Approx(ref).epsilon(1e-12));
    CHECK(rep.value >= beta * u[y]);
  }
}

TEST_CASE("S+ nondecreasing in r on a solved 10x10 grid") {
  PresetOptions o;
  o.n = 9;
  o.boundary = "mixed";
  auto p = make_preset("square-2d", o);
  auto f = solve(p.space(), p.bias());
  REQUIRE(f.ok());
  const auto& g = p.space();
  for (NodeId y : g.interior()) {
    double prev = p.beta * f.values[y];
    for (int k = 1; k * g.min_edge_length() < g.dist_to_terminals(y) - 1e-12; ++k) {
      const double s = s_plus(f.values, y, k * g.min_edge_length(), p.beta, g).value;
      CHECK(s >= prev - 1e-9);
      prev = s;
    }
  }
}

TEST_CASE("S- on solved fields grows with r and stays above beta u") {
  // The closed ball contains y itself, where the quotient is beta u(y), so
  // S- >= beta u(y) always; the reverse inequality and a nonincreasing S-
  // fail on this field.
  PresetOptions o;
  o.n = 9;
  o.boundary = "mixed";
  auto p = make_preset("square-2d", o);
  auto f = solve(p.space(), p.bias());
  const auto& g = p.space();
  const double h = g.min_edge_length();
  double max_rise = 0.0;
  double max_drop = 0.0;
  for (NodeId y : g.interior()) {
    if (g.dist_to_terminals(y) <= h + 1e-12) continue;
    double prev = s_minus(f.values, y, h, p.beta, g).value;
    CHECK(prev >= p.beta * f.values[y] - 1e-12);
    for (int k = 2; k * h < g.dist_to_terminals(y) - 1e-12; ++k) {
      const double s = s_minus(f.values, y, k * h, p.beta, g).value;
      max_rise = std::max(max_rise, s - prev);
      max_drop = std::max(max_drop, prev - s);
      prev = s;
    }
  }
  CHECK(max_drop <= 1e-9);
  CHECK(max_rise > 1e-3);
}

TEST_CASE("increasing slope chain") {
  SUBCASE("monotone path walks to the top") {
    auto p = make_preset("path-1d", {});
    std::vector<double> u(p.space().size());
    for (NodeId x = 0; x < u.size(); ++x) u[x] = static_cast<double>(x) / 50.0;
    auto ch = increasing_slope_chain(u, 3, 1.0, p.beta, p.space());
    CHECK(ch.stop == ChainStop::terminal);
    CHECK(ch.nodes.front() == 3);
    CHECK(ch.nodes.back() == 50);
    CHECK(ch.nodes.size() == 48);
    for (std::size_t j = 1; j < ch.nodes.size(); ++j) CHECK(ch.nodes[j] == ch.nodes[j - 1] + 1);
  }
  SUBCASE("constant field stalls") {
    auto p = make_preset("path-1d", {});
    std::vector<double> u(p.space().size(), 0.3);
    auto ch = increasing_slope_chain(u, 7, 1.0, p.beta, p.space());
    CHECK(ch.stop == ChainStop::local_max);
    CHECK(ch.nodes.size() == 1);
    CHECK(std::string(to_string(ch.stop)) == "local-max");
  }
  SUBCASE("spike data: every start reaches the boundary in a bounded number of steps") {
    PresetOptions o;
    o.n = 12;
    o.boundary = "spike";
    auto p = make_preset("square-2d", o);
    auto f = solve(p.space(), p.bias());
    REQUIRE(f.ok());
    const auto& g = p.space();
    const double delta = 2.0 * g.min_edge_length();
    std::size_t longest = 0;
    for (NodeId x : g.interior()) {
      auto ch = increasing_slope_chain(f.values, x, delta, p.beta, g);
      CHECK(ch.stop == ChainStop::terminal);
      longest = std::max(longest, ch.nodes.size());
      // slopes along the chain do not decrease
      for (std::size_t j = 1; j + 1 < ch.nodes.size(); ++j) {
        const NodeId a = ch.nodes[j];
        if (g.is_terminal(a) || g.dist_to_terminals(a) <= delta) break;
        const double before = ch.slopes[j - 1];
        CHECK(s_plus(f.values, a, delta, p.beta, g).value >= before - 1e-9);
      }
    }
    CHECK(longest <= 13);
  }
}
