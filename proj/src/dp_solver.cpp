#include "bamle/dp_solver.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "bamle/extension_ops.hpp"
#include "bamle/parallel.hpp"

namespace bamle {

namespace {

constexpr std::size_t kMinGrain = 2048;

inline double update(const BiasedGraph& g, std::span<const double> u, NodeId x, double p) {
  double M = -kInfinity;
  double m = kInfinity;
  for (NodeId y : g.moves(x)) {
    M = std::max(M, u[y]);
    m = std::min(m, u[y]);
  }
  return m + p * (M - m) + g.running_payoff(x);
}

void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be positive");
}

struct SweepStats {
  double diff = 0.0;
  double rise = 0.0;
  double drop = 0.0;
};

}  // namespace

ValueField bellman_apply(std::span<const double> u, const BiasedGraph& space, double rho,
                         unsigned threads) {
  check_rho(rho);
  if (u.size() != space.size()) throw std::invalid_argument("field size does not match the space");
  const double p = rho / (rho + 1.0);
  ValueField out;
  out.values.assign(u.begin(), u.end());
  for (NodeId t : space.terminals()) out.values[t] = space.terminal_payoff(t);
  auto interior = space.interior();
  const std::size_t chunks = chunk_count(interior.size(), threads, kMinGrain);
  std::vector<double> diff(chunks, 0.0);
  parallel_chunks(interior.size(), threads, kMinGrain, [&](std::size_t c, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const NodeId x = interior[k];
      out.values[x] = update(space, u, x, p);
      diff[c] = std::max(diff[c], std::abs(out.values[x] - u[x]));
    }
  });
  out.iterations = 1;
  out.residual = *std::max_element(diff.begin(), diff.end());
  out.equation_residual = equation_residual(out.values, space, rho);
  return out;
}

double equation_residual(std::span<const double> u, const BiasedGraph& space, double rho) {
  check_rho(rho);
  const double p = rho / (rho + 1.0);
  double r = 0.0;
  for (NodeId x : space.interior()) r = std::max(r, std::abs(update(space, u, x, p) - u[x]));
  return r;
}

ValueField solve(const BiasedGraph& space, const BiasParams& bias, const SolveConfig& cfg) {
  check_rho(bias.rho);
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  const std::size_t n = space.size();
  const auto g = space.terminal_values();
  const double gmin = *std::min_element(g.begin(), g.end());
  const double gmax = *std::max_element(g.begin(), g.end());

  ValueField field;
  std::vector<double> u(n, 0.0);
  switch (cfg.init) {
    case InitKind::from_lambda: {
      u = lambda_field(space, bias.beta).values;
      for (auto& v : u)
        if (!std::isfinite(v)) v = gmin;
      break;
    }
    case InitKind::from_psi: {
      u = psi_field(space, bias.beta).values;
      for (auto& v : u)
        if (!std::isfinite(v)) v = gmax;
      break;
    }
    case InitKind::custom:
      if (cfg.custom_init.size() != n) throw std::invalid_argument("custom init has the wrong size");
      u = cfg.custom_init;
      break;
    case InitKind::constant:
      u.assign(n, cfg.constant_init);
      break;
  }
  for (NodeId t : space.terminals()) u[t] = space.terminal_payoff(t);
  for (double v : u)
    if (!std::isfinite(v)) throw std::invalid_argument("initial field is not finite");

  // Divergence guard. Without running payoff the value never exceeds Psi, so
  // an increasing value above Psi + 1 signals a modelling error. Components
  // with no terminal have no fixed point once f is nonzero; their values are
  // kept inside the initial range.
  std::vector<double> upper(n, kInfinity);
  if (!space.has_running_payoff()) upper = psi_field(space, bias.beta).values;
  const double init_lo = *std::min_element(u.begin(), u.end()) - 1.0;
  const double init_hi = *std::max_element(u.begin(), u.end()) + 1.0;
  // Rounding in exactly harmonic regions produces wiggles of a few ulps; the
  // monotone-direction bookkeeping ignores them.
  const double wiggle = 1e-14 * std::max({1.0, std::abs(init_lo), std::abs(init_hi)});

  const double p = bias.rho / (bias.rho + 1.0);
  auto interior = space.interior();
  const std::size_t chunks = chunk_count(interior.size(), cfg.threads, kMinGrain);
  std::vector<SweepStats> stats(chunks);
  std::vector<double> next = u;
  bool rose = false;
  bool dropped = false;
  std::optional<NodeId> blown;

  auto guard = [&](NodeId x, double before, double after) {
    if (!space.reaches_terminal(x)) return after < init_lo || after > init_hi;
    return after > before && after > upper[x] + 1.0;
  };

  field.status = SolveStatus::iteration_cap;
  std::size_t it = 0;
  double residual = 0.0;
  if (interior.empty()) field.status = SolveStatus::converged;
  while (!interior.empty() && it < cfg.max_iterations) {
    ++it;
    std::fill(stats.begin(), stats.end(), SweepStats{});
    std::vector<std::optional<NodeId>> bad(chunks);
    if (cfg.sweep == SweepKind::jacobi) {
      parallel_chunks(interior.size(), cfg.threads, kMinGrain,
                      [&](std::size_t c, std::size_t b, std::size_t e) {
                        auto& s = stats[c];
                        for (std::size_t k = b; k < e; ++k) {
                          const NodeId x = interior[k];
                          const double v = update(space, u, x, p);
                          const double d = v - u[x];
                          s.diff = std::max(s.diff, std::abs(d));
                          s.rise = std::max(s.rise, d);
                          s.drop = std::max(s.drop, -d);
                          if (!bad[c] && guard(x, u[x], v)) bad[c] = x;
                          next[x] = v;
                        }
                      });
      std::swap(u, next);
    } else {
      auto& s = stats[0];
      for (NodeId x : interior) {
        const double v = update(space, u, x, p);
        const double d = v - u[x];
        s.diff = std::max(s.diff, std::abs(d));
        s.rise = std::max(s.rise, d);
        s.drop = std::max(s.drop, -d);
        if (!bad[0] && guard(x, u[x], v)) bad[0] = x;
        u[x] = v;
      }
    }
    SweepStats total;
    for (std::size_t c = 0; c < chunks; ++c) {
      total.diff = std::max(total.diff, stats[c].diff);
      total.rise = std::max(total.rise, stats[c].rise);
      total.drop = std::max(total.drop, stats[c].drop);
      if (!blown && bad[c]) blown = bad[c];
    }
    residual = total.diff;
    rose = rose || total.rise > wiggle;
    dropped = dropped || total.drop > wiggle;
    if (blown) {
      field.status = SolveStatus::diverged;
      std::ostringstream msg;
      msg << "divergence guard tripped at node '" << space.label(*blown) << "' after " << it
          << " sweeps (value " << u[*blown] << ")";
      field.diagnostic = msg.str();
      break;
    }
    if (!std::isfinite(residual)) {
      field.status = SolveStatus::diverged;
      field.diagnostic = "non-finite update";
      break;
    }
    if (residual < cfg.tolerance) {
      field.status = SolveStatus::converged;
      break;
    }
  }
  if (field.status == SolveStatus::iteration_cap) {
    std::ostringstream msg;
    msg << "iteration cap " << cfg.max_iterations << " reached with residual " << residual;
    field.diagnostic = msg.str();
  }
  field.values = std::move(u);
  field.iterations = it;
  field.residual = residual;
  field.equation_residual = equation_residual(field.values, space, bias.rho);
  if (rose && !dropped) field.direction = Direction::from_below;
  else if (dropped && !rose) field.direction = Direction::from_above;
  return field;
}

ValueField solve(const GridDomain& grid, double beta, const SolveConfig& config) {
  const BiasParams bias = beta > 0.0 ? make_bias(beta, grid.epsilon()) : unbiased(grid.epsilon());
  return solve(grid.graph(), bias, config);
}

std::vector<RefineLevel> epsilon_refine(const GridSpec& coarsest, const BoundaryFn& boundary,
                                        double beta, std::size_t levels, const SolveConfig& config) {
  if (levels == 0) throw std::invalid_argument("epsilon_refine needs at least one level");
  std::vector<RefineLevel> out;
  GridSpec spec = coarsest;
  for (std::size_t k = 0; k < levels; ++k) {
    RefineLevel lvl;
    lvl.grid = std::make_shared<const GridDomain>(spec, boundary);
    lvl.epsilon = spec.epsilon;
    lvl.field = solve(*lvl.grid, beta, config);
    if (k > 0) {
      const auto& coarse = *out.front().grid;
      const auto& prev = out.back();
      const int fine_scale = 1 << k;
      const int prev_scale = 1 << (k - 1);
      double gap = 0.0;
      for (NodeId x = 0; x < coarse.graph().size(); ++x) {
        auto [i, j] = coarse.lattice_index(x);
        auto a = lvl.grid->node_at(i * fine_scale, j * fine_scale);
        auto b = prev.grid->node_at(i * prev_scale, j * prev_scale);
        if (!a || !b) continue;
        gap = std::max(gap, std::abs(lvl.field[*a] - prev.field[*b]));
      }
      lvl.cauchy_gap = gap;
    }
    out.push_back(std::move(lvl));
    spec.h /= 2.0;
    spec.epsilon /= 2.0;
  }
  return out;
}

}  // namespace bamle
