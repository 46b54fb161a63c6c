#include "bamle/verify_suite.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bamle/extension_ops.hpp"
#include "bamle/slope_calculus.hpp"

namespace bamle {

namespace {

CheckResult make_result(std::string name, double tol) {
  CheckResult r;
  r.name = std::move(name);
  r.tolerance_used = tol;
  r.worst_gap = -kInfinity;
  return r;
}

// Records one inequality evaluation; keeps the witness of the worst one.
void record(CheckResult& r, double gap, std::vector<NodeId> nodes, std::vector<double> values,
            const std::string& detail = {}) {
  ++r.evaluated;
  if (gap > r.worst_gap) {
    r.worst_gap = gap;
    r.witness = CheckWitness{std::move(nodes), std::move(values), detail};
  }
}

CheckResult finish(CheckResult r) {
  if (r.evaluated == 0) {
    r.worst_gap = 0.0;
    if (r.witness.detail.empty()) r.witness.detail = "no admissible evaluation points";
  }
  r.passed = r.worst_gap <= r.tolerance_used;
  return r;
}

CheckResult skipped(std::string name, double tol, const std::string& why) {
  CheckResult r = make_result(std::move(name), tol);
  r.witness.detail = why;
  return finish(std::move(r));
}

std::vector<double> with_payoffs(std::span<const double> u, const BiasedGraph& space) {
  if (u.size() != space.size()) throw std::invalid_argument("field size does not match the space");
  return {u.begin(), u.end()};
}

std::vector<NodeId> reachable(const BiasedGraph& space) {
  std::vector<NodeId> out;
  for (NodeId x = 0; x < space.size(); ++x)
    if (space.reaches_terminal(x)) out.push_back(x);
  return out;
}

double min_payoff(const BiasedGraph& space) {
  auto g = space.terminal_values();
  return *std::min_element(g.begin(), g.end());
}

double max_payoff(const BiasedGraph& space) {
  auto g = space.terminal_values();
  return *std::max_element(g.begin(), g.end());
}

// Radii k*h below dist(y, Y), k >= 1.
std::vector<double> slope_radii(const BiasedGraph& space, NodeId y) {
  std::vector<double> out;
  const double h = space.min_edge_length();
  const double dY = space.dist_to_terminals(y);
  for (int k = 1; k * h < dY - 1e-12; ++k) out.push_back(k * h);
  return out;
}

}  // namespace

double mean_value_residual(double ux, double ball_max, double ball_min, double beta, double epsilon) {
  const double half = beta * epsilon / 2.0;
  return ux - ((1.0 + half) * ball_max + (1.0 - half) * ball_min) / 2.0;
}

double mean_value_residual(std::span<const double> u, const GridDomain& grid, NodeId x,
                           const BiasParams& bias) {
  const auto& g = grid.graph();
  if (u.size() != g.size()) throw std::invalid_argument("field size does not match the grid");
  if (g.is_terminal(x)) throw std::invalid_argument("mean-value residual needs a non-terminal node");
  if (!grid.full_ball(x)) throw std::invalid_argument("epsilon ball of node is clipped");
  double M = u[x];
  double m = u[x];
  for (NodeId y : g.moves(x)) {
    M = std::max(M, u[y]);
    m = std::min(m, u[y]);
  }
  return mean_value_residual(u[x], M, m, bias.beta, grid.epsilon());
}

double harnack_ratio(double R, double beta) {
  if (beta == 0.0) return 1.0 / 3.0;
  return std::expm1(R * beta) / std::expm1(3.0 * R * beta);
}

CheckResult harnack_check(std::span<const double> u, const BiasedGraph& space, NodeId z, double R,
                          double beta, double tol) {
  if (u.size() != space.size()) throw std::invalid_argument("field size does not match the space");
  if (!(R > 0.0)) throw std::invalid_argument("Harnack radius must be positive");
  if (!(4.0 * R < space.dist_to_terminals(z)))
    throw std::invalid_argument("Harnack ball B_4R leaves the domain");
  CheckResult r = make_result("harnack", tol);
  const auto inner = space.ball(z, R);
  const auto outer = space.ball(z, 4.0 * R);
  double S4 = -kInfinity;
  for (NodeId w : outer) S4 = std::max(S4, u[w]);
  const double shift = S4 <= 0.0 ? 0.0 : S4;
  double sup = -kInfinity;
  double inf = kInfinity;
  NodeId at_sup = z;
  NodeId at_inf = z;
  for (NodeId w : inner) {
    const double v = u[w] - shift;
    if (v > sup) { sup = v; at_sup = w; }
    if (v < inf) { inf = v; at_inf = w; }
  }
  const double ratio = harnack_ratio(R, beta);
  r.tolerance_used = tol * std::max(1.0, std::abs(inf));
  std::ostringstream os;
  os << (shift == 0.0 ? "non-positive form" : "shifted form") << ", R=" << R << ", ratio=" << ratio;
  record(r, sup - ratio * inf, {z, at_sup, at_inf}, {sup, inf, shift}, os.str());
  return finish(std::move(r));
}

BlowUpReport blow_up_probe(std::span<const double> u, const GridDomain& grid, NodeId x0,
                           const std::vector<double>& lambdas) {
  const auto& g = grid.graph();
  if (u.size() != g.size()) throw std::invalid_argument("field size does not match the grid");
  const int dim = grid.dim();
  const double h = grid.h();
  auto [i0, j0] = grid.lattice_index(x0);
  BlowUpReport rep;
  for (double lambda : lambdas) {
    if (lambda < 2.0 * h - 1e-12) throw std::invalid_argument("blow-up scale below 2h");
    const int k = static_cast<int>(std::floor(lambda / h + 1e-9));
    std::vector<std::array<double, 2>> zs;
    std::vector<double> vs;
    for (int di = -k; di <= k; ++di) {
      const int jr = dim == 2 ? k : 0;
      for (int dj = -jr; dj <= jr; ++dj) {
        const double ex = di * h;
        const double ey = dj * h;
        if (ex * ex + ey * ey > lambda * lambda * (1.0 + 1e-12)) continue;
        auto node = grid.node_at(i0 + di, j0 + dj);
        if (!node) throw std::invalid_argument("blow-up ball leaves the domain");
        zs.push_back({ex / lambda, ey / lambda});
        vs.push_back((u[*node] - u[x0]) / lambda);
      }
    }
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(zs.size()), dim);
    Eigen::VectorXd v(static_cast<Eigen::Index>(vs.size()));
    for (std::size_t r = 0; r < zs.size(); ++r) {
      for (int c = 0; c < dim; ++c) Z(static_cast<Eigen::Index>(r), c) = zs[r][c];
      v(static_cast<Eigen::Index>(r)) = vs[r];
    }
    Eigen::VectorXd a = Z.colPivHouseholderQr().solve(v);
    const double vn = v.norm();
    BlowUpLevel lvl;
    lvl.lambda = lambda;
    lvl.points = zs.size();
    lvl.gradient.assign(a.data(), a.data() + a.size());
    lvl.relative_residual = vn > 1e-300 ? (Z * a - v).norm() / vn : 0.0;
    rep.levels.push_back(std::move(lvl));
  }
  auto sorted = rep.levels;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.lambda > b.lambda; });
  rep.decreasing = true;
  for (std::size_t k = 1; k < sorted.size(); ++k)
    if (sorted[k].relative_residual > sorted[k - 1].relative_residual + 1e-12) rep.decreasing = false;
  return rep;
}

CheckResult check_sandwich(std::span<const double> u, const BiasedGraph& space, double beta,
                           double tol) {
  if (space.has_running_payoff()) return skipped("sandwich", tol, "running payoff present");
  auto uu = with_payoffs(u, space);
  const auto psi = psi_field(space, beta).values;
  const auto lam = lambda_field(space, beta).values;
  CheckResult r = make_result("sandwich", tol);
  for (NodeId x : reachable(space)) {
    record(r, std::max(lam[x] - uu[x], uu[x] - psi[x]), {x}, {lam[x], uu[x], psi[x]},
           "lambda, u, psi");
  }
  return finish(std::move(r));
}

CheckResult check_extension_slope(const BiasedGraph& space, double beta, double tol) {
  const double L = boundary_slope(space, beta);
  const auto psi = psi_field(space, L, beta).values;
  const auto lam = lambda_field(space, L, beta).values;
  const auto nodes = reachable(space);
  CheckResult r = make_result("extension_slope", tol);
  for (const auto* field : {&psi, &lam}) {
    double best = -kInfinity;
    NodeId bx = 0;
    NodeId by = 0;
    if (nodes.size() == 1) best = beta * (*field)[nodes[0]];
    for (NodeId x : nodes) {
      auto row = space.distance_row(x);
      for (NodeId y : nodes) {
        if (x == y || !std::isfinite((*row)[y])) continue;
        const double q = slope_quotient((*field)[x], (*field)[y], (*row)[y], beta);
        if (q > best) { best = q; bx = x; by = y; }
      }
    }
    record(r, std::abs(best - L), {bx, by}, {best, L}, field == &psi ? "psi slope, L" : "lambda slope, L");
  }
  return finish(std::move(r));
}

CheckResult check_slope_identity(std::span<const double> u, const BiasedGraph& space, double beta,
                                 double tol) {
  auto uu = with_payoffs(u, space);
  const double r0 = space.min_edge_length();
  CheckResult r = make_result("slope_identity", tol);
  for (NodeId y : space.interior()) {
    if (!(space.dist_to_terminals(y) > r0 + 1e-12)) continue;
    const double sb = s_plus(uu, y, r0, beta, space).value;
    const double s0 = s_plus(uu, y, r0, 0.0, space).value;
    record(r, std::abs(sb - s0 - beta * uu[y]), {y}, {sb, s0, uu[y]}, "S+_beta, S+_0, u");
  }
  return finish(std::move(r));
}

CheckResult check_s_plus_monotone(std::span<const double> u, const BiasedGraph& space, double beta,
                                  double tol) {
  auto uu = with_payoffs(u, space);
  CheckResult r = make_result("s_plus_monotone", tol);
  for (NodeId y : space.interior()) {
    double prev = beta * uu[y];  // lower bound beta u(y), then the previous radius
    double prev_r = 0.0;
    for (double rad : slope_radii(space, y)) {
      const double s = s_plus(uu, y, rad, beta, space).value;
      record(r, prev - s, {y}, {prev_r, rad, prev, s}, "r1, r2, S+(r1), S+(r2)");
      prev = s;
      prev_r = rad;
    }
  }
  return finish(std::move(r));
}

CheckResult check_s_minus_monotone(std::span<const double> u, const BiasedGraph& space,
                                   double beta, double tol) {
  // With the quotient taken at the ball minimum, S- is nondecreasing in r and
  // bounded below by beta u(y), mirroring S+.
  auto uu = with_payoffs(u, space);
  CheckResult r = make_result("s_minus_monotone", tol);
  for (NodeId y : space.interior()) {
    double prev = beta * uu[y];
    double prev_r = 0.0;
    for (double rad : slope_radii(space, y)) {
      const double s = s_minus(uu, y, rad, beta, space).value;
      record(r, prev - s, {y}, {prev_r, rad, prev, s}, "r1, r2, S-(r1), S-(r2)");
      prev = s;
      prev_r = rad;
    }
  }
  return finish(std::move(r));
}

CheckResult check_profile_convexity(std::span<const double> u, const BiasedGraph& space,
                                    double beta, bool upper, double tol) {
  auto uu = with_payoffs(u, space);
  CheckResult r = make_result(upper ? "beta_convexity" : "beta_concavity", tol);
  const double h = space.min_edge_length();
  for (NodeId y : space.interior()) {
    const double dY = space.dist_to_terminals(y);
    auto row = space.distance_row(y);
    const int kmax = static_cast<int>(std::ceil(dY / h)) - 1;
    if (kmax < 2) continue;
    std::vector<double> ext(kmax + 1, upper ? -kInfinity : kInfinity);
    for (NodeId w = 0; w < space.size(); ++w) {
      const double d = (*row)[w];
      if (!(d < dY - 1e-12)) continue;
      // shells (kh - h/2, kh + h/2]
      const int k = static_cast<int>(std::ceil(d / h - 0.5 - 1e-9));
      if (k < 0 || k > kmax || k * h >= dY - 1e-12) continue;
      ext[k] = upper ? std::max(ext[k], uu[w]) : std::min(ext[k], uu[w]);
    }
    ProfileSamples prof;
    for (int k = 0; k <= kmax; ++k)
      if (std::isfinite(ext[k]) && k * h < dY - 1e-12) prof.emplace_back(k * h, ext[k]);
    if (prof.size() < 3) continue;
    auto cert = upper ? check_beta_convex(prof, beta, tol) : check_beta_concave(prof, beta, tol);
    // The concave certificate reports gaps for the mirrored profile; same sign convention.
    std::vector<double> vals;
    if (cert.witness)
      for (auto idx : *cert.witness) vals.push_back(prof[idx].first);
    record(r, cert.worst_gap, {y}, vals, cert.routes_agree ? "radii s, t, r" : "routes disagree");
    if (!cert.routes_agree) record(r, kInfinity, {y}, {}, "three-point and substituted tests disagree");
  }
  return finish(std::move(r));
}

CheckResult check_max_principle(std::span<const double> u, const BiasedGraph& space, double tol) {
  if (space.has_running_payoff()) return skipped("max_principle", tol, "running payoff present");
  auto uu = with_payoffs(u, space);
  const double gmax = max_payoff(space);
  const double gmin = min_payoff(space);
  CheckResult r = make_result("max_principle", tol);
  for (NodeId x : space.interior()) {
    if (!space.reaches_terminal(x)) continue;
    record(r, std::max(uu[x] - gmax, gmin - uu[x]), {x}, {uu[x], gmin, gmax}, "u, min g, max g");
  }
  return finish(std::move(r));
}

CheckResult check_mean_value(std::span<const double> u, const BiasedGraph& space,
                             const GridDomain* grid, const BiasParams& bias, double solve_tol) {
  auto uu = with_payoffs(u, space);
  CheckResult r = make_result("mean_value", 10.0 * solve_tol);
  const double eps = bias.epsilon;
  // The game uses tanh(beta eps/2) where the expansion has beta eps/2.
  const double bias_gap = std::abs(bias.theta - bias.beta * eps / 2.0);
  for (NodeId x : space.interior()) {
    if (grid && !grid->full_ball(x)) continue;
    double M = uu[x];
    double m = uu[x];
    for (NodeId y : space.moves(x)) {
      M = std::max(M, uu[y]);
      m = std::min(m, uu[y]);
    }
    const double res = mean_value_residual(uu[x], M, m, bias.beta, eps);
    const double slack = bias_gap * (M - m) / 2.0 + std::abs(space.running_payoff(x));
    record(r, std::abs(res) - slack, {x}, {res, slack}, "residual, O(eps^3) envelope");
  }
  return finish(std::move(r));
}

CheckResult check_cone_sweep(std::span<const double> u, const BiasedGraph& space, double beta,
                             bool positive, const VerifyConfig& cfg) {
  auto uu = with_payoffs(u, space);
  CheckResult r = make_result(positive ? "ceca_sweep" : "cecb_sweep", cfg.cone_tolerance);
  const auto interior = std::vector<NodeId>(space.interior().begin(), space.interior().end());
  if (interior.empty()) return finish(std::move(r));
  const double sign = positive ? 1.0 : -1.0;
  const double scale = std::max(1.0, std::abs(boundary_slope(space, beta)));
  const double h = space.min_edge_length();

  auto run = [&](ExpCone cone, std::vector<NodeId> V, const char* kind) {
    auto boundary = discrete_boundary(V, space);
    if (boundary.empty()) return;
    // Pick K so the cone touches u on the boundary of V.
    cone.K = 0.0;
    double K = -kInfinity;
    for (NodeId b : boundary) K = std::max(K, sign * (uu[b] - cone_eval(cone, b, space)));
    cone.K = sign * K;
    auto cert = positive ? check_ceca(uu, V, cone, space, cfg.cone_tolerance)
                         : check_cecb(uu, V, cone, space, cfg.cone_tolerance);
    if (cert.test_set.empty()) return;
    NodeId at = cert.violation_witness ? cert.violation_witness->node : cert.test_set.front();
    std::ostringstream os;
    os << kind << " cone center=" << space.label(cone.center) << " A=" << cone.A << " B=" << cone.B
       << " K=" << cone.K << " |V|=" << cert.test_set.size();
    record(r, -cert.worst_gap, {at, cone.center}, {uu[at], cone_eval(cone, at, space)}, os.str());
  };

  std::mt19937_64 rng(cfg.seed + (positive ? 0 : 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t drawn = 0;
  for (std::size_t attempt = 0; drawn < cfg.cone_samples && attempt < 20 * cfg.cone_samples; ++attempt) {
    ExpCone cone;
    cone.sign = positive ? ConeSign::positive : ConeSign::negative;
    cone.beta = beta;
    cone.center = static_cast<NodeId>(rng() % space.size());
    cone.A = 2.0 * scale * unit(rng);
    const bool edge_case = rng() % 10 == 0;
    if (beta > 0.0) cone.B = cone.A / beta - (edge_case ? 0.0 : 2.0 * scale * unit(rng));
    else cone.B = scale * (2.0 * unit(rng) - 1.0);
    const NodeId z = interior[rng() % interior.size()];
    const double R = static_cast<double>(rng() % 7) * h;
    std::vector<NodeId> V;
    for (NodeId w : space.ball(z, R))
      if (!space.is_terminal(w) && w != cone.center) V.push_back(w);
    if (V.empty()) continue;
    ++drawn;
    run(cone, std::move(V), "sampled");
  }
  // Flat cones on single nodes: a discrete local maximum (minimum) principle.
  for (NodeId x : interior) {
    ExpCone flat;
    flat.sign = positive ? ConeSign::positive : ConeSign::negative;
    flat.beta = beta;
    flat.center = space.moves(x)[0];
    run(flat, {x}, "flat");
  }
  return finish(std::move(r));
}

CheckResult check_lipschitz(std::span<const double> u, const BiasedGraph& space, double beta,
                            double tol) {
  if (space.has_running_payoff()) return skipped("lipschitz", tol, "running payoff present");
  auto uu = with_payoffs(u, space);
  const double L = boundary_slope(space, beta);
  const double bound = L - beta * min_payoff(space);
  CheckResult r = make_result("lipschitz", tol);
  const auto nodes = reachable(space);
  for (NodeId x : nodes) {
    auto row = space.distance_row(x);
    for (NodeId y : nodes) {
      if (y <= x || !std::isfinite((*row)[y])) continue;
      record(r, std::abs(uu[x] - uu[y]) - bound * (*row)[y], {x, y}, {uu[x], uu[y], bound},
             "u(x1), u(x2), L - beta m");
    }
  }
  return finish(std::move(r));
}

CheckResult check_harnack_auto(std::span<const double> u, const BiasedGraph& space, double beta,
                               double tol) {
  if (space.has_running_payoff()) return skipped("harnack", tol, "running payoff present");
  const double h = space.min_edge_length();
  NodeId z = 0;
  double best = -1.0;
  for (NodeId x : space.interior()) {
    const double d = space.dist_to_terminals(x);
    if (std::isfinite(d) && d > best) { best = d; z = x; }
  }
  const int k = static_cast<int>(std::ceil(best / (4.0 * h) - 1e-9)) - 1;
  if (best <= 0.0 || k < 1) return skipped("harnack", tol, "no interior ball with 4R < dist(z, Y)");
  return harnack_check(u, space, z, k * h, beta, tol);
}

CheckResult check_beta_monotonicity(const std::vector<std::vector<double>>& fields, double tol) {
  CheckResult r = make_result("beta_monotonicity", tol);
  for (std::size_t k = 1; k < fields.size(); ++k) {
    if (fields[k].size() != fields[k - 1].size())
      throw std::invalid_argument("beta monotonicity: field sizes differ");
    for (NodeId x = 0; x < fields[k].size(); ++x)
      record(r, fields[k - 1][x] - fields[k][x], {x}, {fields[k - 1][x], fields[k][x]},
             "u(beta_k), u(beta_k+1) at level " + std::to_string(k));
  }
  return finish(std::move(r));
}

std::vector<CheckResult> run_all(std::span<const double> u, const BiasedGraph& space,
                                 const BiasParams& bias, const VerifyConfig& cfg,
                                 const GridDomain* grid) {
  const double b = bias.beta;
  const double tol = cfg.tolerance;
  std::vector<CheckResult> out;
  out.push_back(check_sandwich(u, space, b, tol));
  out.push_back(check_extension_slope(space, b, tol));
  out.push_back(check_slope_identity(u, space, b, tol));
  out.push_back(check_s_plus_monotone(u, space, b, tol));
  out.push_back(check_s_minus_monotone(u, space, b, tol));
  out.push_back(check_profile_convexity(u, space, b, true, tol));
  out.push_back(check_profile_convexity(u, space, b, false, tol));
  out.push_back(check_max_principle(u, space, tol));
  out.push_back(check_harnack_auto(u, space, b, tol));
  out.push_back(check_mean_value(u, space, grid, bias, cfg.solve_tolerance));
  out.push_back(check_cone_sweep(u, space, b, true, cfg));
  out.push_back(check_cone_sweep(u, space, b, false, cfg));
  out.push_back(check_lipschitz(u, space, b, tol));
  return out;
}

std::vector<CheckResult> run_all(std::span<const double> u, const GridDomain& grid, double beta,
                                 const VerifyConfig& cfg) {
  const BiasParams bias = beta > 0.0 ? make_bias(beta, grid.epsilon()) : unbiased(grid.epsilon());
  return run_all(u, grid.graph(), bias, cfg, &grid);
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace bamle
