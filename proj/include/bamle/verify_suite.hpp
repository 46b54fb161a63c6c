#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bamle/core_model.hpp"

namespace bamle {

struct CheckWitness {
  std::vector<NodeId> nodes;
  std::vector<double> values;
  std::string detail;
};

/// passed == (worst_gap <= tolerance_used). worst_gap is the largest observed
/// violation of the checked inequality; negative means slack everywhere.
struct CheckResult {
  std::string name;
  bool passed = true;
  double worst_gap = 0.0;
  CheckWitness witness;
  double tolerance_used = 0.0;
  std::size_t evaluated = 0;  ///< number of inequalities tested
};

struct VerifyConfig {
  double tolerance = 1e-9;
  double cone_tolerance = 1e-10;
  double solve_tolerance = 1e-12;
  std::size_t cone_samples = 100;
  std::uint64_t seed = 20240601;
};

/// u(x) - [(1 + beta eps/2) max + (1 - beta eps/2) min] / 2 from given ball extremes.
double mean_value_residual(double ux, double ball_max, double ball_min, double beta, double epsilon);

/// Residual over the epsilon ball of a grid node. Rejects nodes whose ball is
/// clipped by the boundary or a hole.
double mean_value_residual(std::span<const double> u, const GridDomain& grid, NodeId x,
                           const BiasParams& bias);

/// (e^{R beta} - 1)/(e^{3 R beta} - 1), equal to 1/3 at beta = 0.
double harnack_ratio(double R, double beta);

/// Harnack inequality on B_R(z). Uses sup u <= ratio inf u when u <= 0 on
/// B_4R(z), and otherwise the same inequality for u - sup_{B_4R} u.
/// Requires 4R < dist(z, Y).
CheckResult harnack_check(std::span<const double> u, const BiasedGraph& space, NodeId z, double R,
                          double beta, double tol = 1e-9);

struct BlowUpLevel {
  double lambda = 0.0;
  std::size_t points = 0;
  std::vector<double> gradient;  ///< fitted linear coefficients
  double relative_residual = 0.0;
};

struct BlowUpReport {
  std::vector<BlowUpLevel> levels;
  bool decreasing = false;  ///< residuals nonincreasing as lambda shrinks
};

/// Least-squares linear fit of (u(x0 + lambda z) - u(x0))/lambda over lattice
/// points with |z| <= 1. Diagnostic only. Rejects lambda < 2h and balls that
/// leave the domain.
BlowUpReport blow_up_probe(std::span<const double> u, const GridDomain& grid, NodeId x0,
                           const std::vector<double>& lambdas);

// Individual checks used by run_all.
CheckResult check_sandwich(std::span<const double> u, const BiasedGraph& space, double beta,
                           double tol);
CheckResult check_extension_slope(const BiasedGraph& space, double beta, double tol);
CheckResult check_slope_identity(std::span<const double> u, const BiasedGraph& space, double beta,
                                 double tol);
CheckResult check_s_plus_monotone(std::span<const double> u, const BiasedGraph& space, double beta,
                                  double tol);
CheckResult check_s_minus_monotone(std::span<const double> u, const BiasedGraph& space,
                                   double beta, double tol);
CheckResult check_profile_convexity(std::span<const double> u, const BiasedGraph& space,
                                    double beta, bool upper, double tol);
CheckResult check_max_principle(std::span<const double> u, const BiasedGraph& space, double tol);
CheckResult check_mean_value(std::span<const double> u, const BiasedGraph& space,
                             const GridDomain* grid, const BiasParams& bias, double solve_tol);
CheckResult check_cone_sweep(std::span<const double> u, const BiasedGraph& space, double beta,
                             bool positive, const VerifyConfig& config);
CheckResult check_lipschitz(std::span<const double> u, const BiasedGraph& space, double beta,
                            double tol);
CheckResult check_harnack_auto(std::span<const double> u, const BiasedGraph& space, double beta,
                               double tol);

/// Pointwise u_k <= u_{k+1} + tol for fields listed by increasing beta.
CheckResult check_beta_monotonicity(const std::vector<std::vector<double>>& fields, double tol);

/// Runs every single-field check. `grid` restricts the mean-value check to
/// nodes with a full epsilon ball; on plain graphs every move set is the ball.
std::vector<CheckResult> run_all(std::span<const double> u, const BiasedGraph& space,
                                 const BiasParams& bias, const VerifyConfig& config = {},
                                 const GridDomain* grid = nullptr);
std::vector<CheckResult> run_all(std::span<const double> u, const GridDomain& grid, double beta,
                                 const VerifyConfig& config = {});

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace bamle
