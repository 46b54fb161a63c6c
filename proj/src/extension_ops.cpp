#include "bamle/extension_ops.hpp"

#include <algorithm>
#include <stdexcept>

#include "bamle/slope_calculus.hpp"

namespace bamle {

namespace {

// (1 - e^{-beta d}) / beta, continuous at beta = 0.
double decay_gain(double beta, double d) {
  if (beta == 0.0) return d;
  return -std::expm1(-beta * d) / beta;
}

}  // namespace

double cone_profile(const ExpCone& c, double d) {
  if (!std::isfinite(d)) throw std::invalid_argument("cone evaluated at unreachable node");
  if (c.sign == ConeSign::positive)
    return c.A * decay_gain(c.beta, d) + c.B * std::exp(-c.beta * d) + c.K;
  // (1 - e^{beta d}) / beta = -decay_gain(-beta, d)
  return -c.A * decay_gain(-c.beta, d) + c.B * std::exp(c.beta * d) + c.K;
}

double cone_eval(const ExpCone& cone, NodeId x, const BiasedGraph& space) {
  return cone_profile(cone, space.distance(cone.center, x));
}

std::vector<double> cone_field(const ExpCone& cone, const BiasedGraph& space) {
  auto row = space.distance_row(cone.center);
  std::vector<double> out(space.size());
  for (NodeId x = 0; x < space.size(); ++x) out[x] = cone_profile(cone, (*row)[x]);
  return out;
}

bool is_admissible(const ExpCone& cone) {
  if (cone.A < 0.0) return false;
  if (cone.beta == 0.0) return true;
  return cone.B <= cone.A / cone.beta * (1.0 + 1e-15);
}

double boundary_slope(const BiasedGraph& space, double beta) {
  std::vector<double> u(space.size(), 0.0);
  for (NodeId t : space.terminals()) u[t] = space.terminal_payoff(t);
  return exp_slope(u, space.terminals(), beta, space).value;
}

namespace {

// delta_y = L/beta - g(y) for every terminal, with L the slope of g itself.
// When beta d is large Lambda multiplies delta_y by e^{beta d}, so delta_y
// must carry full relative precision; forming L/beta - g(y) by subtraction
// would leave only rounding noise. Pairs ending at y have the cancellation-free
// form (g(y) - g(a)) / (e^{beta d} - 1).
std::vector<double> slope_margins(const BiasedGraph& space, double beta) {
  auto Y = space.terminals();
  const std::size_t k = Y.size();
  std::vector<double> margin(k, -kInfinity);
  if (k < 2 || beta == 0.0) {
    const double L = boundary_slope(space, beta);
    for (std::size_t i = 0; i < k; ++i)
      margin[i] = beta == 0.0 ? 0.0 : L / beta - space.terminal_payoff(Y[i]);
    return margin;
  }
  // best[b] = max over a of the quotient ending at b, divided by beta.
  std::vector<double> best(k, -kInfinity);
  for (std::size_t ia = 0; ia < k; ++ia) {
    auto row = space.distance_row(Y[ia]);
    const double ga = space.terminal_payoff(Y[ia]);
    for (std::size_t ib = 0; ib < k; ++ib) {
      if (ia == ib) continue;
      const double d = (*row)[Y[ib]];
      if (!std::isfinite(d)) continue;
      const double gb = space.terminal_payoff(Y[ib]);
      best[ib] = std::max(best[ib], slope_quotient(ga, gb, d, beta) / beta);
      // pair (a, b) with b the terminal itself
      margin[ib] = std::max(margin[ib], (gb - ga) / std::expm1(beta * d));
    }
  }
  std::size_t top = 0;
  for (std::size_t i = 1; i < k; ++i)
    if (best[i] > best[top]) top = i;
  double second = -kInfinity;
  for (std::size_t i = 0; i < k; ++i)
    if (i != top) second = std::max(second, best[i]);
  for (std::size_t i = 0; i < k; ++i) {
    const double other = i == top ? second : best[top];
    margin[i] = std::max(margin[i], other - space.terminal_payoff(Y[i]));
  }
  return margin;
}

double margin_for(double L, double beta, std::size_t i, const std::vector<double>& base,
                  double Lg) {
  if (beta == 0.0) return 0.0;
  return base[i] + (L - Lg) / beta;
}

double psi_term(double g, double L, double beta, double d) {
  return std::exp(-beta * d) * g + L * decay_gain(beta, d);
}

// e^{beta d} g + (L/beta)(1 - e^{beta d}) = g - delta (e^{beta d} - 1)
double lambda_term(double g, double L, double delta, double beta, double d) {
  if (beta == 0.0) return g - L * d;
  return g - delta * std::expm1(beta * d);
}

}  // namespace

double psi_extension(const BiasedGraph& space, double L, NodeId x, double beta) {
  auto row = space.distance_row(x);
  double best = kInfinity;
  for (NodeId y : space.terminals()) {
    const double d = (*row)[y];
    if (!std::isfinite(d)) continue;
    best = std::min(best, psi_term(space.terminal_payoff(y), L, beta, d));
  }
  return best;
}

double lambda_extension(const BiasedGraph& space, double L, NodeId x, double beta) {
  const auto base = slope_margins(space, beta);
  const double Lg = boundary_slope(space, beta);
  auto row = space.distance_row(x);
  auto Y = space.terminals();
  double best = -kInfinity;
  for (std::size_t i = 0; i < Y.size(); ++i) {
    const double d = (*row)[Y[i]];
    if (!std::isfinite(d)) continue;
    best = std::max(best, lambda_term(space.terminal_payoff(Y[i]), L,
                                      margin_for(L, beta, i, base, Lg), beta, d));
  }
  return best;
}

namespace {

template <class F>
ExtensionField make_field(const BiasedGraph& space, double L, double beta, F&& f) {
  if (beta < 0.0) throw std::invalid_argument("extension: beta must be nonnegative");
  ExtensionField out;
  out.L = L;
  out.boundary_slope = space.terminals().size() >= 2 ? boundary_slope(space, beta) : -kInfinity;
  out.slope_deficit = L < out.boundary_slope - 1e-12 * std::max(1.0, std::abs(out.boundary_slope));
  out.values.resize(space.size());
  for (NodeId x = 0; x < space.size(); ++x) out.values[x] = f(space, L, x, beta);
  return out;
}

}  // namespace

ExtensionField psi_field(const BiasedGraph& space, double L, double beta) {
  return make_field(space, L, beta, psi_extension);
}

ExtensionField lambda_field(const BiasedGraph& space, double L, double beta) {
  const auto base = slope_margins(space, beta);
  const double Lg = boundary_slope(space, beta);
  auto Y = space.terminals();
  std::vector<double> delta(Y.size());
  for (std::size_t i = 0; i < Y.size(); ++i) delta[i] = margin_for(L, beta, i, base, Lg);
  return make_field(space, L, beta, [&](const BiasedGraph& g, double, NodeId x, double b) {
    auto row = g.distance_row(x);
    double best = -kInfinity;
    for (std::size_t i = 0; i < Y.size(); ++i) {
      const double d = (*row)[Y[i]];
      if (std::isfinite(d)) best = std::max(best, lambda_term(g.terminal_payoff(Y[i]), L, delta[i], b, d));
    }
    return best;
  });
}

ExtensionField psi_field(const BiasedGraph& space, double beta) {
  return psi_field(space, boundary_slope(space, beta), beta);
}

ExtensionField lambda_field(const BiasedGraph& space, double beta) {
  return lambda_field(space, boundary_slope(space, beta), beta);
}

std::vector<NodeId> discrete_boundary(std::span<const NodeId> V, const BiasedGraph& space) {
  std::vector<char> inV(space.size(), 0);
  for (NodeId x : V) inV.at(x) = 1;
  std::vector<char> mark(space.size(), 0);
  for (NodeId x : V) {
    if (space.is_terminal(x)) {
      mark[x] = 1;
      continue;
    }
    for (NodeId y : space.moves(x))
      if (!inV[y]) mark[y] = 1;
  }
  std::vector<NodeId> out;
  for (NodeId x = 0; x < space.size(); ++x)
    if (mark[x]) out.push_back(x);
  return out;
}

namespace {

// sign = +1: u <= C;  sign = -1: u >= C.
ComparisonCertificate compare(std::span<const double> u, std::span<const NodeId> V,
                              const ExpCone& cone, const BiasedGraph& space, double tol,
                              double sign) {
  if (u.size() != space.size()) throw std::invalid_argument("field size does not match the space");
  if (V.empty()) throw std::invalid_argument("comparison test set is empty");
  if (std::find(V.begin(), V.end(), cone.center) != V.end())
    throw std::invalid_argument("cone center must lie outside the test set");
  ComparisonCertificate cert;
  cert.cone = cone;
  cert.boundary = discrete_boundary(V, space);
  auto row = space.distance_row(cone.center);
  double slack = 0.0;
  for (NodeId b : cert.boundary)
    slack = std::max(slack, sign * (u[b] - cone_profile(cone, (*row)[b])));
  cert.boundary_slack = slack;
  for (NodeId x : V) {
    if (space.is_terminal(x)) continue;
    cert.test_set.push_back(x);
    const double gap = slack - sign * (u[x] - cone_profile(cone, (*row)[x]));
    if (gap < cert.worst_gap) {
      cert.worst_gap = gap;
      if (gap < -tol) cert.violation_witness = ComparisonWitness{x, gap};
    }
  }
  cert.holds = !cert.violation_witness.has_value();
  return cert;
}

}  // namespace

ComparisonCertificate check_ceca(std::span<const double> u, std::span<const NodeId> V,
                                 const ExpCone& cone, const BiasedGraph& space, double tol) {
  if (cone.sign != ConeSign::positive) throw std::invalid_argument("CECA takes a positive cone");
  return compare(u, V, cone, space, tol, 1.0);
}

ComparisonCertificate check_cecb(std::span<const double> u, std::span<const NodeId> V,
                                 const ExpCone& cone, const BiasedGraph& space, double tol) {
  if (cone.sign != ConeSign::negative) throw std::invalid_argument("CECB takes a negative cone");
  return compare(u, V, cone, space, tol, -1.0);
}

namespace {

// e^{beta x} - 1, replaced by x at beta == 0 (only ratios of it are used).
double grow(double beta, double x) { return beta == 0.0 ? x : std::expm1(beta * x); }

double ratio(double beta, double num, double den) { return grow(beta, num) / grow(beta, den); }

ConvexityCertificate convex_check(const ProfileSamples& s, double beta, double tol) {
  const std::size_t n = s.size();
  if (n < 3) throw std::invalid_argument("convexity check needs at least 3 samples");
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(s[i].first > s[i - 1].first))
      throw std::invalid_argument("convexity samples must have strictly increasing radii");
    scale = std::max(scale, std::abs(s[i].second));
  }
  const double eff = tol * scale;
  ConvexityCertificate cert;
  cert.worst_gap = -kInfinity;
  bool fail1 = false;
  bool fail2 = false;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    for (std::size_t j = i + 1; j + 1 < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const auto [rs, gs] = s[i];
        const auto [rt, gt] = s[j];
        const auto [rr, gr] = s[k];
        // Three-point form.
        const double ws = ratio(beta, rr - rt, rr - rs);
        const double wr = 1.0 - ws;
        const double gap = gt - (ws * gs + wr * gr);
        if (gap > cert.worst_gap) {
          cert.worst_gap = gap;
          if (gap > eff) cert.witness = std::array<std::size_t, 3>{i, j, k};
        }
        if (gap > eff) fail1 = true;
        // Convexity of h = e^{beta t} g in tau = e^{beta t} - 1. Differences of
        // tau are formed as e^{beta a} (e^{beta (b - a)} - 1) to avoid cancellation.
        const double hs = std::exp(beta * rs) * gs;
        const double ht = std::exp(beta * rt) * gt;
        const double hr = std::exp(beta * rr) * gr;
        const double span = grow(beta, rr - rs);
        const double chord = std::exp(beta * (rt - rs)) * grow(beta, rr - rt) / span * hs +
                             grow(beta, rt - rs) / span * hr;
        if (ht - chord > eff * std::exp(beta * rt)) fail2 = true;
      }
    }
  }
  cert.holds = !fail1;
  cert.routes_agree = fail1 == fail2;
  return cert;
}

}  // namespace

ConvexityCertificate check_beta_convex(const ProfileSamples& samples, double beta, double tol) {
  return convex_check(samples, beta, tol);
}

ConvexityCertificate check_beta_concave(const ProfileSamples& samples, double beta, double tol) {
  ProfileSamples flipped;
  flipped.reserve(samples.size());
  for (auto [r, g] : samples) flipped.emplace_back(r, -g);
  return convex_check(flipped, -beta, tol);
}

}  // namespace bamle
