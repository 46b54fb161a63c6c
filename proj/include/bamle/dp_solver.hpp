#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bamle/core_model.hpp"

namespace bamle {

enum class InitKind { from_lambda, from_psi, custom, constant };
enum class SweepKind { jacobi, gauss_seidel };

struct SolveConfig {
  double tolerance = 1e-12;
  std::size_t max_iterations = 10'000'000;
  InitKind init = InitKind::from_lambda;
  std::vector<double> custom_init;  ///< used with InitKind::custom
  double constant_init = 0.0;       ///< used with InitKind::constant
  SweepKind sweep = SweepKind::jacobi;
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

/// One synchronous sweep of u(x) = (rho max + min)/(rho + 1) + f(x) over the
/// moves of every non-terminal x; terminals are reset to g.
ValueField bellman_apply(std::span<const double> u, const BiasedGraph& space, double rho,
                         unsigned threads = 1);

/// sup over non-terminals of |T(u) - u|.
double equation_residual(std::span<const double> u, const BiasedGraph& space, double rho);

/// Fixed-point iteration of the Bellman operator. Uses bias.rho for the coin
/// and bias.beta for the extension used as initial guess.
ValueField solve(const BiasedGraph& space, const BiasParams& bias, const SolveConfig& config = {});
/// Grid solve at the grid's own epsilon; beta == 0 is the fair-coin game.
ValueField solve(const GridDomain& grid, double beta, const SolveConfig& config = {});

struct RefineLevel {
  double epsilon = 0.0;
  std::shared_ptr<const GridDomain> grid;
  ValueField field;
  /// sup-norm difference to the previous level on the coarsest lattice points.
  std::optional<double> cauchy_gap;
};

/// Solves on grids with h and epsilon halved `levels - 1` times.
std::vector<RefineLevel> epsilon_refine(const GridSpec& coarsest, const BoundaryFn& boundary,
                                        double beta, std::size_t levels,
                                        const SolveConfig& config = {});

}  // namespace bamle
