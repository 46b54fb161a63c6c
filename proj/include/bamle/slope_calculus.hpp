#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "bamle/core_model.hpp"

namespace bamle {

struct SlopeReport {
  double value = 0.0;
  /// (x, y) for pair slopes; (y, w) for S+/S-, w being the maximizing ball member.
  std::array<NodeId, 2> witness{0, 0};
  double radius = 0.0;
};

/// beta * (u(y) - e^{-beta d} u(x)) / (1 - e^{-beta d}); the Lipschitz
/// difference quotient when beta == 0.
double slope_quotient(double ux, double uy, double d, double beta);

/// Global exponential slope of u over the node set E. A singleton set gives
/// beta * u. Throws on an empty set or an infinite pairwise distance.
SlopeReport exp_slope(std::span<const double> u, std::span<const NodeId> E, double beta,
                      const BiasedGraph& space);

/// Slope over the one-hop ball around a non-terminal y.
SlopeReport local_slope(std::span<const double> u, NodeId y, double beta, const BiasedGraph& space);

/// Positive slope with radius r: the max over the closed ball of
/// beta (u(w) - e^{-beta r} u(y)) / (1 - e^{-beta r}). Requires 0 < r < dist(y, Y).
SlopeReport s_plus(std::span<const double> u, NodeId y, double r, double beta,
                   const BiasedGraph& space);

/// Negative slope with radius r: the max over the closed ball of
/// beta (u(w) - e^{beta r} u(y)) / (1 - e^{beta r}), attained at the ball minimum.
SlopeReport s_minus(std::span<const double> u, NodeId y, double r, double beta,
                    const BiasedGraph& space);

enum class ChainStop { terminal, local_max, cycle };

struct SlopeChain {
  std::vector<NodeId> nodes;
  /// slopes[j] is the pair quotient from nodes[j] to nodes[j+1].
  std::vector<double> slopes;
  ChainStop stop = ChainStop::terminal;
};

/// Greedy chain x_j = argmax of u over the delta ball around x_{j-1}, ties to
/// the lowest id. Stops at a terminal, at a local maximum, or on revisiting a node.
SlopeChain increasing_slope_chain(std::span<const double> u, NodeId x0, double delta, double beta,
                                  const BiasedGraph& space);

const char* to_string(ChainStop s);

}  // namespace bamle
