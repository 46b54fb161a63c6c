#include <doctest.h>

#include <cmath>
#include <random>

#include "bamle/dp_solver.hpp"
#include "bamle/extension_ops.hpp"
#include "bamle/presets.hpp"
#include "oracles.hpp"

using namespace bamle;

namespace {

double brute_psi(const BiasedGraph& g, double L, NodeId x, double beta) {
  double best = kInfinity;
  for (NodeId y : g.terminals()) {
    const double e = std::exp(-beta * g.distance(x, y));
    best = std::min(best, e * g.terminal_payoff(y) + L / beta * (1.0 - e));
  }
  return best;
}

double brute_lambda(const BiasedGraph& g, double L, NodeId x, double beta) {
  double best = -kInfinity;
  for (NodeId y : g.terminals()) {
    const double e = std::exp(beta * g.distance(x, y));
    best = std::max(best, e * g.terminal_payoff(y) + L / beta * (1.0 - e));
  }
  return best;
}

}  // namespace

TEST_CASE("extensions reproduce g on Y") {
  for (const auto& e : corpus()) {
    const auto& g = e.problem.space();
    const double b = e.problem.beta;
    auto psi = psi_field(g, b);
    auto lam = lambda_field(g, b);
    CHECK_FALSE(psi.slope_deficit);
    for (NodeId y : g.terminals()) {
      CHECK(psi.values[y] == doctest::Approx(g.terminal_payoff(y)).epsilon(1e-12));
      CHECK(lam.values[y] == doctest::Approx(g.terminal_payoff(y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("single terminal: extensions are the two cones") {
  PresetOptions o;
  o.beta = 0.8;
  auto p = make_preset("single-terminal", o);
  const auto& g = p.space();
  const double A = 1.3;
  for (NodeId x = 0; x < g.size(); ++x) {
    const double d = g.distance(x, 0);
    CHECK(psi_extension(g, A, x, 0.8) == doctest::Approx(oracle::positive_cone(A, 0.8, d)).epsilon(1e-12));
    CHECK(lambda_extension(g, A, x, 0.8) ==
          doctest::Approx(oracle::negative_cone(A, 0.8, d)).epsilon(1e-12));
  }
}

TEST_CASE("extensions match the defining inf and sup") {
  PresetOptions o;
  o.n = 8;
  o.beta = 0.4;
  o.boundary = "mixed";
  auto p = make_preset("square-2d", o);
  const auto& g = p.space();
  const double L = boundary_slope(g, 0.4) + 0.25;
  auto psi = psi_field(g, L, 0.4);
  auto lam = lambda_field(g, L, 0.4);
  for (NodeId x = 0; x < g.size(); ++x) {
    CHECK(psi.values[x] == doctest::Approx(brute_psi(g, L, x, 0.4)).epsilon(1e-12));
    CHECK(lam.values[x] == doctest::Approx(brute_lambda(g, L, x, 0.4)).epsilon(1e-12));
  }
  auto low = psi_field(g, 0.0, 0.4);
  CHECK(low.slope_deficit);
}

TEST_CASE("Lambda stays accurate when beta d is large") {
  // path 0..50, beta 1: e^{beta d} reaches e^50
  PresetOptions o;
  o.beta = 1.0;
  auto p = make_preset("path-1d", o);
  const auto& g = p.space();
  auto lam = lambda_field(g, 1.0);
  auto psi = psi_field(g, 1.0);
  auto u = oracle::path_recursion(50, std::exp(1.0), 0.0, 1.0);
  for (NodeId x = 0; x < g.size(); ++x) {
    CHECK(std::isfinite(lam.values[x]));
    CHECK(lam.values[x] <= u[x] + 1e-9);
    CHECK(u[x] <= psi.values[x] + 1e-9);
  }
}

TEST_CASE("cone evaluation") {
  PresetOptions o;
  o.N = 20;
  auto p = make_preset("path-1d", o);
  const auto& g = p.space();
  ExpCone c{3, 1.2, ConeSign::positive, 0.4, -0.1, 0.7};
  CHECK(cone_eval(c, 3, g) == doctest::Approx(0.3));
  ExpCone flat{3, 0.0, ConeSign::negative, 0.0, 2.5, 0.7};
  for (NodeId x = 0; x < g.size(); ++x) CHECK(cone_eval(flat, x, g) == doctest::Approx(2.5));

  ExpCone tiny{0, 1.0, ConeSign::positive, 0.5, 0.25, 1e-8};
  ExpCone tiny_neg{0, 1.0, ConeSign::negative, 0.5, 0.25, 1e-8};
  for (NodeId x = 0; x <= 10; ++x) {
    const double d = g.distance(0, x);
    CHECK(std::abs(cone_eval(tiny, x, g) - (d + 0.75)) < 1e-6);
    CHECK(std::abs(cone_eval(tiny_neg, x, g) - (-d + 0.75)) < 1e-6);
  }
  for (double d : {0.0, 0.5, 3.0}) {
    ExpCone pc{0, 2.0, ConeSign::positive, 0.0, 0.0, 0.6};
    ExpCone nc{0, 2.0, ConeSign::negative, 0.0, 0.0, 0.6};
    CHECK(cone_profile(pc, d) == doctest::Approx(oracle::positive_cone(2.0, 0.6, d)).epsilon(1e-14));
    CHECK(cone_profile(nc, d) == doctest::Approx(oracle::negative_cone(2.0, 0.6, d)).epsilon(1e-14));
  }
  CHECK(is_admissible({0, 1.0, ConeSign::positive, 0.5, 0.0, 1.0}));
  CHECK_FALSE(is_admissible({0, 1.0, ConeSign::positive, 1.5, 0.0, 1.0}));
  CHECK_FALSE(is_admissible({0, -1.0, ConeSign::positive, 0.0, 0.0, 1.0}));
}

TEST_CASE("discrete boundary of a node set") {
  auto p = make_preset("path-1d", {});
  std::vector<NodeId> V{4, 5, 6};
  CHECK(discrete_boundary(V, p.space()) == std::vector<NodeId>{3, 7});
  std::vector<NodeId> W{0, 1};
  CHECK(discrete_boundary(W, p.space()) == std::vector<NodeId>{0, 2});
}

TEST_CASE("comparison certificates") {
  PresetOptions o;
  o.beta = 1.0;
  auto p = make_preset("cone-1d", o);
  const auto& g = p.space();
  auto f = solve(g, p.bias());
  REQUIRE(f.ok());
  std::vector<NodeId> V(g.interior().begin(), g.interior().end());

  SUBCASE("the field's own cone holds with equality") {
    ExpCone c{0, 1.0, ConeSign::positive, 0.0, 0.0, 1.0};
    auto cert = check_ceca(f.values, V, c, g);
    CHECK(cert.holds);
    CHECK(std::abs(cert.worst_gap) < 1e-10);
    CHECK(std::abs(cert.boundary_slack) < 1e-10);
  }

  SUBCASE("random admissible cones") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const NodeId c0 = static_cast<NodeId>(rng() % g.size());
      const double A = 3.0 * U(rng);
      const double B = A * (2.0 * U(rng) - 1.0);
      ExpCone pc{c0, A, ConeSign::positive, B, 0.0, 1.0};
      ExpCone nc{c0, A, ConeSign::negative, B, 0.0, 1.0};
      std::vector<NodeId> sub;
      for (NodeId x : V)
        if (x != c0 && g.distance(x, c0) <= 0.3 + U(rng) * 5.0) sub.push_back(x);
      if (sub.empty()) continue;
      CHECK(check_ceca(f.values, sub, pc, g).holds);
      CHECK(check_cecb(f.values, sub, nc, g).holds);
    }
  }

  SUBCASE("a bumped value is caught with a reproducible witness") {
    auto bad = f.values;
    bad[100] += 0.1;
    ExpCone c{0, 1.0, ConeSign::positive, 0.0, 0.0, 1.0};
    auto cert = check_ceca(bad, V, c, g);
    REQUIRE_FALSE(cert.holds);
    REQUIRE(cert.violation_witness);
    const NodeId w = cert.violation_witness->node;
    CHECK(w == 100);
    const double gap = cone_eval(c, w, g) + cert.boundary_slack - bad[w];
    CHECK(gap == doctest::Approx(cert.violation_witness->gap).epsilon(1e-9));
    CHECK(gap < -kComparisonTol);
  }
}

TEST_CASE("truncated ray field satisfies CECA against cones at the far end") {
  auto p = make_preset("counterexample-ray", {});
  const auto& g = p.space();
  auto u = counterexample_field(g, 0.5);
  const NodeId far = *g.find("(20,0)");
  std::vector<NodeId> V;
  for (NodeId x : g.interior())
    if (g.label(x) != "(0,0)") V.push_back(x);
  for (double A : {0.1, 0.5, 2.0}) {
    ExpCone c{far, A, ConeSign::positive, 0.0, 0.0, p.beta};
    CHECK(check_ceca(u, V, c, g).holds);
  }
}

TEST_CASE("beta-convexity of profiles") {
  ProfileSamples flat, cone, neg, bump;
  for (int i = 0; i <= 20; ++i) {
    const double r = 0.01 * i;
    flat.emplace_back(r, 0.7);
    cone.emplace_back(r, oracle::positive_cone(1.5, 1.0, r));
    neg.emplace_back(r, oracle::negative_cone(1.5, 1.0, r));
    bump.emplace_back(r, r - 5.0 * r * r);
  }
  CHECK(check_beta_convex(flat, 1.0).holds);
  CHECK(check_beta_concave(flat, 1.0).holds);
  auto c = check_beta_convex(cone, 1.0);
  CHECK(c.holds);
  CHECK(c.routes_agree);
  CHECK(std::abs(c.worst_gap) < 1e-12);
  CHECK(oracle::brute_beta_convex(cone, 1.0, 1e-12));
  CHECK(check_beta_concave(neg, 1.0).holds);

  auto b = check_beta_convex(bump, 1.0);
  CHECK_FALSE(b.holds);
  CHECK(b.routes_agree);
  REQUIRE(b.witness);
  auto [s, t, r] = *b.witness;
  CHECK(s < t);
  CHECK(t < r);
  const double w = oracle::phi_weight(bump[s].first, bump[t].first, bump[r].first, 1.0);
  CHECK(bump[t].second > w * bump[s].second + (1.0 - w) * bump[r].second);
  CHECK_FALSE(oracle::brute_beta_convex(bump, 1.0, 1e-10));
}

TEST_CASE("beta-convexity verdicts agree with brute force on random profiles") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    ProfileSamples s;
    double r = 0.0;
    const double beta = 0.2 + 2.0 * std::abs(N(rng));
    const double curv = N(rng);
    for (int i = 0; i < 8; ++i) {
      r += 0.05 + 0.1 * std::abs(N(rng));
      s.emplace_back(r, oracle::positive_cone(1.0, beta, r) + curv * r * r);
    }
    CHECK(check_beta_convex(s, beta, 1e-12).holds == oracle::brute_beta_convex(s, beta, 1e-12));
  }
}
