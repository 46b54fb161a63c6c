#pragma once
// Reference computations for tests. Each one is written from the defining
// formula with plain loops and std::exp, and shares no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <vector>

namespace oracle {

// Increasing path solution by the difference recursion
// rho (u[k+1] - u[k]) = u[k] - u[k-1], scaled to hit the end values.
inline std::vector<double> path_recursion(int N, double rho, double u0, double uN) {
  std::vector<double> diff(N);
  diff[0] = 1.0;
  for (int k = 1; k < N; ++k) diff[k] = diff[k - 1] / rho;
  double total = 0.0;
  for (double d : diff) total += d;
  std::vector<double> u(N + 1);
  u[0] = u0;
  for (int k = 0; k < N; ++k) u[k + 1] = u[k] + (uN - u0) * diff[k] / total;
  u[N] = uN;
  return u;
}

inline double positive_cone(double A, double beta, double d) {
  if (beta == 0.0) return A * d;
  return A / beta * (1.0 - std::exp(-beta * d));
}

inline double negative_cone(double A, double beta, double d) {
  if (beta == 0.0) return -A * d;
  return A / beta * (1.0 - std::exp(beta * d));
}

// beta (u(y) - e^{-beta d} u(x)) / (1 - e^{-beta d}), or (u(y) - u(x))/d.
inline double pair_quotient(double ux, double uy, double d, double beta) {
  if (beta == 0.0) return (uy - ux) / d;
  const double e = std::exp(-beta * d);
  return beta * (uy - e * ux) / (1.0 - e);
}

// Brute force sup of pair_quotient over ordered pairs of distinct nodes.
template <class Dist>
double brute_slope(const std::vector<double>& u, const std::vector<std::size_t>& E, double beta,
                   Dist&& dist) {
  double best = -std::numeric_limits<double>::infinity();
  for (auto x : E)
    for (auto y : E)
      if (x != y) best = std::max(best, pair_quotient(u[x], u[y], dist(x, y), beta));
  return best;
}

// Weight of the left endpoint s when t in [s, r] is written as a combination
// of s and r with the exponential interpolation phi on the rescaled interval.
inline double phi_weight(double s, double t, double r, double beta) {
  if (beta == 0.0) return (r - t) / (r - s);
  const double len = r - s;
  return (std::exp(-beta * (t - s)) - std::exp(-beta * len)) / (1.0 - std::exp(-beta * len));
}

// true when every sample triple satisfies g(t) <= w g(s) + (1 - w) g(r).
inline bool brute_beta_convex(const std::vector<std::pair<double, double>>& pts, double beta,
                              double tol) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const double w = phi_weight(pts[i].first, pts[j].first, pts[k].first, beta);
        if (pts[j].second > w * pts[i].second + (1.0 - w) * pts[k].second + tol) return false;
      }
  return true;
}

// Exact value of the one-step game between two terminals.
inline double one_step(double p, double q, double rho) {
  return (rho * std::max(p, q) + std::min(p, q)) / (rho + 1.0);
}

// Hop distances on an n x m lattice (4-neighbour) by breadth-first search.
inline std::vector<int> lattice_bfs(int nx, int ny, int si, int sj) {
  std::vector<int> d(static_cast<std::size_t>(nx) * ny, -1);
  std::deque<std::array<int, 2>> q{{si, sj}};
  d[si * ny + sj] = 0;
  while (!q.empty()) {
    auto [i, j] = q.front();
    q.pop_front();
    const int di[] = {1, -1, 0, 0};
    const int dj[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int a = i + di[k], b = j + dj[k];
      if (a < 0 || b < 0 || a >= nx || b >= ny || d[a * ny + b] >= 0) continue;
      d[a * ny + b] = d[i * ny + j] + 1;
      q.push_back({a, b});
    }
  }
  return d;
}

// Leading term of the mean-value residual of the cone (1 - e^{-beta x})/beta:
// the weighted average of the ball extremes is cosh t - (t/2) sinh t times
// e^{-beta x}, with t = beta eps.
inline double cone_mean_value_residual(double x, double beta, double eps) {
  const double t = beta * eps;
  const double avg = std::cosh(t) - 0.5 * t * std::sinh(t);
  return std::exp(-beta * x) * (avg - 1.0) / beta;
}

// Plain Gauss-Seidel value iteration on an explicit adjacency list.
inline std::vector<double> value_iteration(const std::vector<std::vector<std::size_t>>& adj,
                                           const std::map<std::size_t, double>& terminal,
                                           double rho, std::vector<double> u, int sweeps) {
  for (auto [k, v] : terminal) u[k] = v;
  for (int s = 0; s < sweeps; ++s)
    for (std::size_t x = 0; x < adj.size(); ++x) {
      if (terminal.count(x)) continue;
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      for (auto y : adj[x]) {
        hi = std::max(hi, u[y]);
        lo = std::min(lo, u[y]);
      }
      u[x] = (rho * hi + lo) / (rho + 1.0);
    }
  return u;
}

}  // namespace oracle
