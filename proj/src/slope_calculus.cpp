#include "bamle/slope_calculus.hpp"

#include <stdexcept>
#include <unordered_set>

namespace bamle {

double slope_quotient(double ux, double uy, double d, double beta) {
  if (beta == 0.0) return (uy - ux) / d;
  // 1 - e^{-beta d} without cancellation for small beta d.
  const double denom = -std::expm1(-beta * d);
  return beta * (uy - ux) / denom + beta * ux;
}

namespace {

void check_field(std::span<const double> u, const BiasedGraph& space) {
  if (u.size() != space.size())
    throw std::invalid_argument("field size does not match the space");
}

double s_minus_quotient(double uy, double uw, double r, double beta) {
  if (beta == 0.0) return (uy - uw) / r;
  const double denom = -std::expm1(beta * r);  // 1 - e^{beta r} < 0
  return beta * (uw - uy) / denom + beta * uy;
}

void check_radius(NodeId y, double r, const BiasedGraph& space) {
  if (!(r > 0.0)) throw std::invalid_argument("slope radius must be positive");
  if (r >= space.dist_to_terminals(y))
    throw std::invalid_argument("slope radius must be below dist(y, Y)");
}

}  // namespace

SlopeReport exp_slope(std::span<const double> u, std::span<const NodeId> E, double beta,
                      const BiasedGraph& space) {
  check_field(u, space);
  if (E.empty()) throw std::invalid_argument("exp_slope: empty node set");
  if (beta < 0.0) throw std::invalid_argument("exp_slope: beta must be nonnegative");
  SlopeReport rep;
  if (E.size() == 1) {
    rep.value = beta * u[E[0]];
    rep.witness = {E[0], E[0]};
    return rep;
  }
  rep.value = -kInfinity;
  for (NodeId x : E) {
    auto row = space.distance_row(x);
    for (NodeId y : E) {
      if (x == y) continue;
      const double d = (*row)[y];
      if (!std::isfinite(d)) throw std::invalid_argument("exp_slope: disconnected pair in set");
      const double q = slope_quotient(u[x], u[y], d, beta);
      if (q > rep.value) {
        rep.value = q;
        rep.witness = {x, y};
        rep.radius = d;
      }
    }
  }
  return rep;
}

SlopeReport local_slope(std::span<const double> u, NodeId y, double beta, const BiasedGraph& space) {
  check_field(u, space);
  if (space.is_terminal(y)) throw std::invalid_argument("local_slope: node is terminal");
  double r = kInfinity;
  for (auto [w, len] : space.metric_neighbors(y)) r = std::min(r, len);
  if (!std::isfinite(r)) throw std::invalid_argument("local_slope: node has no metric neighbour");
  auto ball = space.ball(y, r);
  SlopeReport rep = exp_slope(u, ball, beta, space);
  rep.radius = r;
  return rep;
}

SlopeReport s_plus(std::span<const double> u, NodeId y, double r, double beta,
                   const BiasedGraph& space) {
  check_field(u, space);
  check_radius(y, r, space);
  SlopeReport rep;
  rep.value = -kInfinity;
  rep.radius = r;
  for (NodeId w : space.ball(y, r)) {
    const double q = slope_quotient(u[y], u[w], r, beta);
    if (q > rep.value) {
      rep.value = q;
      rep.witness = {y, w};
    }
  }
  return rep;
}

SlopeReport s_minus(std::span<const double> u, NodeId y, double r, double beta,
                    const BiasedGraph& space) {
  check_field(u, space);
  check_radius(y, r, space);
  SlopeReport rep;
  rep.value = -kInfinity;
  rep.radius = r;
  for (NodeId w : space.ball(y, r)) {
    const double q = s_minus_quotient(u[y], u[w], r, beta);
    if (q > rep.value) {
      rep.value = q;
      rep.witness = {y, w};
    }
  }
  return rep;
}

SlopeChain increasing_slope_chain(std::span<const double> u, NodeId x0, double delta, double beta,
                                  const BiasedGraph& space) {
  check_field(u, space);
  if (!(delta > 0.0)) throw std::invalid_argument("chain radius delta must be positive");
  if (space.is_terminal(x0)) throw std::invalid_argument("chain must start at a non-terminal node");
  SlopeChain chain;
  chain.nodes.push_back(x0);
  std::unordered_set<NodeId> seen{x0};
  NodeId cur = x0;
  while (true) {
    if (space.is_terminal(cur)) {
      chain.stop = ChainStop::terminal;
      break;
    }
    NodeId best = cur;
    for (NodeId w : space.ball(cur, delta)) {
      if (u[w] > u[best]) best = w;  // ascending ids, so ties keep the lowest
    }
    if (best == cur) {
      chain.stop = ChainStop::local_max;
      break;
    }
    chain.slopes.push_back(slope_quotient(u[cur], u[best], space.distance(cur, best), beta));
    chain.nodes.push_back(best);
    if (!seen.insert(best).second) {
      chain.stop = ChainStop::cycle;
      break;
    }
    cur = best;
  }
  return chain;
}

const char* to_string(ChainStop s) {
  switch (s) {
    case ChainStop::terminal: return "terminal";
    case ChainStop::local_max: return "local-max";
    default: return "cycle";
  }
}

}  // namespace bamle
