#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bamle/core_model.hpp"

namespace bamle {

enum class ConeSign { positive, negative };

/// C+(x) = (A/beta)(1 - e^{-beta d}) + B e^{-beta d} + K
/// C-(x) = (A/beta)(1 - e^{+beta d}) + B e^{+beta d} + K,  d = d(x, center).
/// beta == 0 gives the linear cones +-A d + B + K.
struct ExpCone {
  NodeId center = 0;
  double A = 0.0;
  ConeSign sign = ConeSign::positive;
  double B = 0.0;
  double K = 0.0;
  double beta = 0.0;
};

/// Cone value at distance d from its center.
double cone_profile(const ExpCone& cone, double d);
double cone_eval(const ExpCone& cone, NodeId x, const BiasedGraph& space);
std::vector<double> cone_field(const ExpCone& cone, const BiasedGraph& space);

/// Cones usable as comparison functions for solutions of the discrete game:
/// A >= 0 and B <= A/beta. Larger B bends the profile the wrong way and the
/// cone is no longer a supersolution (subsolution for C-).
bool is_admissible(const ExpCone& cone);

/// Exponential slope of the terminal data g over Y.
double boundary_slope(const BiasedGraph& space, double beta);

/// inf over y in Y of e^{-beta d} g(y) + (L/beta)(1 - e^{-beta d}).
double psi_extension(const BiasedGraph& space, double L, NodeId x, double beta);
/// sup over y in Y of e^{beta d} g(y) + (L/beta)(1 - e^{beta d}).
double lambda_extension(const BiasedGraph& space, double L, NodeId x, double beta);

struct ExtensionField {
  std::vector<double> values;
  double L = 0.0;
  double boundary_slope = 0.0;
  /// L below the slope of g: the extension may not reproduce g and the
  /// sandwich can fail.
  bool slope_deficit = false;
};

ExtensionField psi_field(const BiasedGraph& space, double L, double beta);
ExtensionField lambda_field(const BiasedGraph& space, double L, double beta);
/// Same, with L = boundary_slope(space, beta).
ExtensionField psi_field(const BiasedGraph& space, double beta);
ExtensionField lambda_field(const BiasedGraph& space, double beta);

inline constexpr double kComparisonTol = 1e-10;

struct ComparisonWitness {
  NodeId node = 0;
  double gap = 0.0;  ///< negative: the interior bound is violated by -gap
};

struct ComparisonCertificate {
  bool holds = true;
  std::optional<ComparisonWitness> violation_witness;
  std::vector<NodeId> test_set;
  std::vector<NodeId> boundary;
  ExpCone cone;
  /// How far u exceeds the cone on the boundary (0 if the hypothesis holds exactly).
  double boundary_slack = 0.0;
  /// Smallest interior gap observed; negative when violated.
  double worst_gap = kInfinity;
};

/// Nodes outside V reached by a move from V, plus terminals listed in V.
std::vector<NodeId> discrete_boundary(std::span<const NodeId> V, const BiasedGraph& space);

/// Comparison from above with a positive cone: u <= C + delta on the boundary
/// of V implies u <= C + delta + tol on V, where delta is the observed boundary slack.
ComparisonCertificate check_ceca(std::span<const double> u, std::span<const NodeId> V,
                                 const ExpCone& cone, const BiasedGraph& space,
                                 double tol = kComparisonTol);
/// Comparison from below with a negative cone.
ComparisonCertificate check_cecb(std::span<const double> u, std::span<const NodeId> V,
                                 const ExpCone& cone, const BiasedGraph& space,
                                 double tol = kComparisonTol);

struct ConvexityCertificate {
  bool holds = true;
  /// Sample indices (s, t, r) of the worst triple when the check fails.
  std::optional<std::array<std::size_t, 3>> witness;
  double worst_gap = 0.0;  ///< max of lhs - rhs over triples (three-point form)
  /// Whether the three-point inequality and the substituted-variable convexity
  /// test gave the same verdict.
  bool routes_agree = true;
};

using ProfileSamples = std::vector<std::pair<double, double>>;

/// beta-convexity of a radial profile g(r) sampled at increasing radii.
ConvexityCertificate check_beta_convex(const ProfileSamples& samples, double beta,
                                       double tol = kComparisonTol);
/// beta-concavity, i.e. the mirrored inequality with e^{-beta} weights.
ConvexityCertificate check_beta_concave(const ProfileSamples& samples, double beta,
                                        double tol = kComparisonTol);

}  // namespace bamle
