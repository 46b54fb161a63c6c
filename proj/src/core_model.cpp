#include "bamle/core_model.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <set>
#include <stdexcept>

namespace bamle {

BiasParams make_bias(double beta, double epsilon) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("make_bias: beta must be positive and finite");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("make_bias: epsilon must be positive and finite");
  BiasParams b;
  b.beta = beta;
  b.epsilon = epsilon;
  b.rho = std::exp(beta * epsilon);
  b.theta = std::tanh(beta * epsilon / 2.0);
  b.r_inv = std::exp(-beta * epsilon);
  return b;
}

BiasParams unbiased(double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("unbiased: epsilon must be positive");
  BiasParams b;
  b.epsilon = epsilon;
  return b;
}

BiasedGraph::BiasedGraph(GraphData data)
    : labels_(std::move(data.labels)),
      running_(std::move(data.running)),
      move_radius_(data.move_radius),
      cache_(std::make_shared<DistanceCache>()) {
  const std::size_t n = labels_.size();
  if (n == 0) throw std::invalid_argument("graph has no nodes");
  for (NodeId i = 0; i < n; ++i) {
    if (!index_.emplace(labels_[i], i).second)
      throw std::invalid_argument("duplicate node id '" + labels_[i] + "'");
  }
  if (data.terminal.size() != n)
    throw std::invalid_argument("terminal table size does not match node count");
  if (!running_.empty() && running_.size() != n)
    throw std::invalid_argument("running payoff size does not match node count");
  if (!(move_radius_ > 0.0)) throw std::invalid_argument("move radius must be positive");

  metric_adj_.assign(n, {});
  std::set<std::pair<NodeId, NodeId>> seen;
  min_edge_ = kInfinity;
  double max_edge = 0.0;
  for (const auto& e : data.metric_edges) {
    if (e.a >= n || e.b >= n) throw std::invalid_argument("edge references unknown node");
    if (e.a == e.b) continue;
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw std::invalid_argument("edge length must be positive and finite");
    auto key = std::minmax(e.a, e.b);
    if (!seen.insert({key.first, key.second}).second) continue;
    metric_adj_[e.a].emplace_back(e.b, e.length);
    metric_adj_[e.b].emplace_back(e.a, e.length);
    min_edge_ = std::min(min_edge_, e.length);
    max_edge = std::max(max_edge, e.length);
  }
  for (auto& adj : metric_adj_) std::sort(adj.begin(), adj.end());
  if (!std::isfinite(min_edge_)) min_edge_ = move_radius_;
  uniform_weights_ = max_edge <= min_edge_ * (1.0 + 1e-15) || seen.empty();

  if (data.moves.empty()) {
    moves_.assign(n, {});
    for (NodeId i = 0; i < n; ++i)
      for (auto [j, w] : metric_adj_[i]) moves_[i].push_back(j);
  } else {
    if (data.moves.size() != n) throw std::invalid_argument("move table size mismatch");
    moves_ = std::move(data.moves);
    for (auto& m : moves_) {
      std::sort(m.begin(), m.end());
      m.erase(std::unique(m.begin(), m.end()), m.end());
    }
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j : moves_[i]) {
        if (j >= n || j == i) throw std::invalid_argument("invalid move target");
        if (!std::binary_search(moves_[j].begin(), moves_[j].end(), i))
          throw std::invalid_argument("move sets must be symmetric");
      }
    }
  }

  terminal_mask_.assign(n, 0);
  payoff_.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (NodeId i = 0; i < n; ++i) {
    if (data.terminal[i]) {
      if (!std::isfinite(*data.terminal[i]))
        throw std::invalid_argument("terminal payoff must be finite at '" + labels_[i] + "'");
      terminal_mask_[i] = 1;
      payoff_[i] = *data.terminal[i];
      terminals_.push_back(i);
    } else {
      interior_.push_back(i);
      if (moves_[i].empty())
        throw std::invalid_argument("non-terminal node '" + labels_[i] + "' has no moves");
    }
  }
  if (terminals_.empty()) throw std::invalid_argument("terminal set is empty");

  // Multi-source shortest path from Y.
  dist_to_y_.assign(n, kInfinity);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (NodeId t : terminals_) {
    dist_to_y_[t] = 0.0;
    pq.emplace(0.0, t);
  }
  while (!pq.empty()) {
    auto [d, x] = pq.top();
    pq.pop();
    if (d > dist_to_y_[x]) continue;
    for (auto [y, w] : metric_adj_[x]) {
      if (d + w < dist_to_y_[y]) {
        dist_to_y_[y] = d + w;
        pq.emplace(d + w, y);
      }
    }
  }

  cache_->rows.assign(n, nullptr);
  if (n <= kAllPairsLimit) {
    for (NodeId i = 0; i < n; ++i)
      cache_->rows[i] = std::make_shared<const std::vector<double>>(single_source(i));
  }
}

BiasedGraph BiasedGraph::from_edges(std::vector<std::string> labels,
                                    const std::vector<std::pair<NodeId, NodeId>>& edges,
                                    const std::unordered_map<NodeId, double>& terminal,
                                    const std::unordered_map<NodeId, double>& running,
                                    double edge_length) {
  GraphData data;
  const std::size_t n = labels.size();
  data.labels = std::move(labels);
  for (auto [a, b] : edges) data.metric_edges.push_back({a, b, edge_length});
  data.terminal.assign(n, std::nullopt);
  for (auto [id, v] : terminal) {
    if (id >= n) throw std::invalid_argument("terminal payoff references unknown node");
    data.terminal[id] = v;
  }
  if (!running.empty()) {
    data.running.assign(n, 0.0);
    for (auto [id, v] : running) {
      if (id >= n) throw std::invalid_argument("running payoff references unknown node");
      data.running[id] = v;
    }
  }
  data.move_radius = edge_length;
  return BiasedGraph(std::move(data));
}

std::optional<NodeId> BiasedGraph::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double BiasedGraph::terminal_payoff(NodeId x) const {
  if (!is_terminal(x)) throw std::invalid_argument("node '" + label(x) + "' is not terminal");
  return payoff_[x];
}

std::vector<double> BiasedGraph::terminal_values() const {
  std::vector<double> out;
  out.reserve(terminals_.size());
  for (NodeId t : terminals_) out.push_back(payoff_[t]);
  return out;
}

std::vector<double> BiasedGraph::single_source(NodeId src) const {
  const std::size_t n = size();
  std::vector<double> dist(n, kInfinity);
  dist[src] = 0.0;
  if (uniform_weights_) {
    // Hop counts times the common length keep lattice distances exact multiples.
    std::vector<long> hops(n, -1);
    hops[src] = 0;
    std::deque<NodeId> q{src};
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop_front();
      for (auto [y, w] : metric_adj_[x]) {
        if (hops[y] < 0) {
          hops[y] = hops[x] + 1;
          q.push_back(y);
        }
      }
    }
    for (NodeId i = 0; i < n; ++i)
      if (hops[i] >= 0) dist[i] = static_cast<double>(hops[i]) * min_edge_;
    return dist;
  }
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.emplace(0.0, src);
  while (!pq.empty()) {
    auto [d, x] = pq.top();
    pq.pop();
    if (d > dist[x]) continue;
    for (auto [y, w] : metric_adj_[x]) {
      if (d + w < dist[y]) {
        dist[y] = d + w;
        pq.emplace(d + w, y);
      }
    }
  }
  return dist;
}

std::shared_ptr<const std::vector<double>> BiasedGraph::distance_row(NodeId x) const {
  if (x >= size()) throw std::out_of_range("node id out of range");
  std::lock_guard lock(cache_->mutex);
  auto& row = cache_->rows[x];
  if (!row) row = std::make_shared<const std::vector<double>>(single_source(x));
  return row;
}

std::vector<NodeId> BiasedGraph::ball(NodeId y, double r) const {
  auto row = distance_row(y);
  std::vector<NodeId> out;
  for (NodeId w = 0; w < size(); ++w)
    if ((*row)[w] <= r + kBallSlack) out.push_back(w);
  return out;
}

double path_distance(const BiasedGraph& g, NodeId x, NodeId y) {
  if (x >= g.size() || y >= g.size()) throw std::out_of_range("path_distance: unknown node");
  return g.distance(x, y);
}

double path_distance(const GridDomain& grid, NodeId x, NodeId y) {
  return path_distance(grid.graph(), x, y);
}

// ---------------------------------------------------------------------------

namespace {

int lattice_count(double extent, double h, const char* axis) {
  if (!(extent > 0.0)) throw std::invalid_argument(std::string("grid extent must be positive on ") + axis);
  const double steps = extent / h;
  const long k = std::lround(steps);
  if (k < 2 || std::abs(steps - static_cast<double>(k)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument(std::string("grid extent on ") + axis +
                                " must be an integer multiple (>= 2) of h");
  return static_cast<int>(k);
}

bool strictly_inside(const Hole& hole, const Point& p, int dim, double tol) {
  for (int a = 0; a < dim; ++a)
    if (!(p[a] > hole.lo[a] + tol && p[a] < hole.hi[a] - tol)) return false;
  return true;
}

bool on_rim(const Hole& hole, const Point& p, int dim, double tol) {
  for (int a = 0; a < dim; ++a)
    if (p[a] < hole.lo[a] - tol || p[a] > hole.hi[a] + tol) return false;
  return !strictly_inside(hole, p, dim, tol);
}

}  // namespace

std::string GridDomain::lattice_label(int dim, int i, int j) {
  return dim == 1 ? std::to_string(i) : std::to_string(i) + "," + std::to_string(j);
}

GridDomain::GridDomain(GridSpec spec, const BoundaryFn& boundary) : spec_(std::move(spec)) {
  build([&](int, int, const Point& p) -> std::optional<double> { return boundary(p); });
}

GridDomain::GridDomain(GridSpec spec, const std::unordered_map<std::string, double>& boundary)
    : spec_(std::move(spec)) {
  build([&](int i, int j, const Point&) -> std::optional<double> {
    auto it = boundary.find(lattice_label(spec_.dim, i, j));
    if (it == boundary.end()) return std::nullopt;
    return it->second;
  });
}

void GridDomain::build(
    const std::function<std::optional<double>(int, int, const Point&)>& boundary_value) {
  if (spec_.dim != 1 && spec_.dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (!(spec_.h > 0.0)) throw std::invalid_argument("grid spacing h must be positive");
  if (!(spec_.epsilon >= spec_.h * (1.0 - 1e-12)))
    throw std::invalid_argument("grid move radius epsilon must be at least h");
  nx_ = lattice_count(spec_.extent[0], spec_.h, "x");
  ny_ = spec_.dim == 2 ? lattice_count(spec_.extent[1], spec_.h, "y") : 0;
  const double tol = 1e-9 * spec_.h;

  node_of_.assign(static_cast<std::size_t>(nx_ + 1) * (ny_ + 1), -1);
  GraphData data;
  data.move_radius = spec_.epsilon;
  for (int j = 0; j <= ny_; ++j) {
    for (int i = 0; i <= nx_; ++i) {
      Point p{i * spec_.h, spec_.dim == 2 ? j * spec_.h : 0.0};
      bool removed = false;
      bool rim = false;
      for (const auto& hole : spec_.holes) {
        if (strictly_inside(hole, p, spec_.dim, tol)) removed = true;
        else if (on_rim(hole, p, spec_.dim, tol)) rim = true;
      }
      if (removed) continue;
      const bool outer = i == 0 || i == nx_ || (spec_.dim == 2 && (j == 0 || j == ny_));
      const NodeId id = coords_.size();
      node_of_[static_cast<std::size_t>(j) * (nx_ + 1) + i] = static_cast<long>(id);
      coords_.push_back(p);
      index_of_.push_back({i, j});
      data.labels.push_back(lattice_label(spec_.dim, i, j));
      if (outer || rim) {
        auto v = boundary_value(i, j, p);
        if (!v) throw std::invalid_argument("missing boundary value at node " + data.labels.back());
        data.terminal.push_back(*v);
      } else {
        data.terminal.push_back(std::nullopt);
      }
    }
  }

  for (NodeId id = 0; id < coords_.size(); ++id) {
    auto [i, j] = index_of_[id];
    auto link = [&](int i2, int j2) {
      auto other = node_at(i2, j2);
      if (!other) return;
      Point mid{(coords_[id][0] + coords_[*other][0]) / 2, (coords_[id][1] + coords_[*other][1]) / 2};
      for (const auto& hole : spec_.holes)
        if (strictly_inside(hole, mid, spec_.dim, tol)) return;
      data.metric_edges.push_back({id, *other, spec_.h});
    };
    link(i + 1, j);
    if (spec_.dim == 2) link(i, j + 1);
  }

  // Moves: every lattice node within path distance epsilon (bounded BFS).
  const int k = static_cast<int>(std::floor(spec_.epsilon / spec_.h + 1e-9));
  std::vector<std::vector<NodeId>> adj(coords_.size());
  for (const auto& e : data.metric_edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  data.moves.assign(coords_.size(), {});
  std::vector<int> hops(coords_.size(), -1);
  for (NodeId src = 0; src < coords_.size(); ++src) {
    std::vector<NodeId> touched{src};
    hops[src] = 0;
    std::deque<NodeId> q{src};
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop_front();
      if (hops[x] == k) continue;
      for (NodeId y : adj[x]) {
        if (hops[y] < 0) {
          hops[y] = hops[x] + 1;
          touched.push_back(y);
          q.push_back(y);
        }
      }
    }
    for (NodeId t : touched) {
      if (t != src) data.moves[src].push_back(t);
      hops[t] = -1;
    }
  }
  graph_ = std::make_shared<const BiasedGraph>(std::move(data));
}

std::optional<NodeId> GridDomain::node_at(int i, int j) const {
  if (i < 0 || i > nx_ || j < 0 || j > ny_) return std::nullopt;
  long id = node_of_[static_cast<std::size_t>(j) * (nx_ + 1) + i];
  if (id < 0) return std::nullopt;
  return static_cast<NodeId>(id);
}

std::optional<NodeId> GridDomain::nearest(const Point& p) const {
  const long i = std::lround(p[0] / spec_.h);
  const long j = spec_.dim == 2 ? std::lround(p[1] / spec_.h) : 0;
  if (std::abs(p[0] - i * spec_.h) > spec_.h / 2 + 1e-12) return std::nullopt;
  if (spec_.dim == 2 && std::abs(p[1] - j * spec_.h) > spec_.h / 2 + 1e-12) return std::nullopt;
  return node_at(static_cast<int>(i), static_cast<int>(j));
}

bool GridDomain::full_ball(NodeId x) const {
  const int k = static_cast<int>(std::floor(spec_.epsilon / spec_.h + 1e-9));
  auto [i, j] = index_of_.at(x);
  std::size_t expected = 0;
  for (int di = -k; di <= k; ++di) {
    const int rest = k - std::abs(di);
    const int jlo = spec_.dim == 2 ? -rest : 0;
    const int jhi = spec_.dim == 2 ? rest : 0;
    for (int dj = jlo; dj <= jhi; ++dj) {
      if (!node_at(i + di, j + dj)) return false;
      ++expected;
    }
  }
  // A hole can leave lattice points present but reachable only by a detour.
  return graph_->moves(x).size() + 1 == expected;
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::from_below: return "from_below";
    case Direction::from_above: return "from_above";
    default: return "unspecified";
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_cap: return "iteration_cap";
    default: return "diverged";
  }
}

}  // namespace bamle
