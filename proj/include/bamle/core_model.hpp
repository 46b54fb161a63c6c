#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace bamle {

using NodeId = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Slack added to radii when collecting discrete balls, absorbing float noise
/// in accumulated lattice distances.
inline constexpr double kBallSlack = 1e-12;

/// Coin bias of the game. Player I wins a toss with probability rho/(rho+1).
struct BiasParams {
  double beta = 0.0;
  double epsilon = 0.0;
  double rho = 1.0;    ///< e^{beta*epsilon}
  double theta = 0.0;  ///< tanh(beta*epsilon/2) = (rho-1)/(rho+1)
  double r_inv = 1.0;  ///< 1/rho

  double win_prob_I() const { return rho / (rho + 1.0); }
  double win_prob_II() const { return 1.0 / (rho + 1.0); }
};

/// Builds consistent bias parameters. Throws std::invalid_argument unless
/// beta > 0 and epsilon > 0. A negative bias is handled by the caller by
/// flipping the sign of the boundary data.
BiasParams make_bias(double beta, double epsilon);

/// The classical fair-coin game (beta = 0, rho = 1).
BiasParams unbiased(double epsilon);

/// Weighted edge of the metric graph.
struct MetricEdge {
  NodeId a;
  NodeId b;
  double length;
};

/// Raw description used to assemble a BiasedGraph.
struct GraphData {
  std::vector<std::string> labels;
  std::vector<MetricEdge> metric_edges;
  /// Move sets per node. Empty means "moves are the metric neighbours".
  std::vector<std::vector<NodeId>> moves;
  std::vector<std::optional<double>> terminal;
  std::vector<double> running;  ///< empty means f == 0
  double move_radius = 1.0;
};

/// Finite state space of a tug-of-war game: undirected moves, terminal set Y
/// with payoff g, optional running payoff f, and a path metric.
///
/// Immutable after construction. Distances are precomputed for graphs with at
/// most kAllPairsLimit nodes; larger graphs fill single-source rows on demand
/// behind a mutex, so sharing a const instance across threads is safe.
class BiasedGraph {
 public:
  static constexpr std::size_t kAllPairsLimit = 2000;

  explicit BiasedGraph(GraphData data);

  /// Unit-hop graph with a shared edge length (the abstract-game case).
  static BiasedGraph from_edges(std::vector<std::string> labels,
                                const std::vector<std::pair<NodeId, NodeId>>& edges,
                                const std::unordered_map<NodeId, double>& terminal,
                                const std::unordered_map<NodeId, double>& running = {},
                                double edge_length = 1.0);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(NodeId x) const { return labels_.at(x); }
  std::optional<NodeId> find(const std::string& label) const;

  std::span<const NodeId> moves(NodeId x) const { return moves_.at(x); }
  std::span<const std::pair<NodeId, double>> metric_neighbors(NodeId x) const {
    return metric_adj_.at(x);
  }

  bool is_terminal(NodeId x) const { return terminal_mask_.at(x) != 0; }
  double terminal_payoff(NodeId x) const;
  double running_payoff(NodeId x) const { return running_.empty() ? 0.0 : running_.at(x); }
  bool has_running_payoff() const { return !running_.empty(); }

  std::span<const NodeId> terminals() const { return terminals_; }
  std::span<const NodeId> interior() const { return interior_; }

  /// Payoff vector over terminals in the order of terminals().
  std::vector<double> terminal_values() const;

  double move_radius() const { return move_radius_; }
  /// Smallest metric edge length; the lattice spacing on grids.
  double min_edge_length() const { return min_edge_; }

  /// Path distance; +infinity between disconnected nodes.
  double distance(NodeId x, NodeId y) const { return (*distance_row(x))[y]; }
  std::shared_ptr<const std::vector<double>> distance_row(NodeId x) const;

  /// Distance from x to the terminal set.
  double dist_to_terminals(NodeId x) const { return dist_to_y_.at(x); }

  /// Nodes within distance r of y (closed ball), ascending ids.
  std::vector<NodeId> ball(NodeId y, double r) const;

  /// Whether a terminal is reachable from x through the metric graph.
  bool reaches_terminal(NodeId x) const { return std::isfinite(dist_to_y_.at(x)); }

 private:
  std::vector<double> single_source(NodeId src) const;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<std::pair<NodeId, double>>> metric_adj_;
  std::vector<std::vector<NodeId>> moves_;
  std::vector<char> terminal_mask_;
  std::vector<double> payoff_;
  std::vector<double> running_;
  std::vector<NodeId> terminals_;
  std::vector<NodeId> interior_;
  std::vector<double> dist_to_y_;
  double move_radius_ = 1.0;
  double min_edge_ = 1.0;
  bool uniform_weights_ = true;

  struct DistanceCache {
    std::mutex mutex;
    std::vector<std::shared_ptr<const std::vector<double>>> rows;
  };
  // Shared between copies; the graph is immutable so cached rows stay valid.
  std::shared_ptr<DistanceCache> cache_;
};

using Point = std::array<double, 2>;
using BoundaryFn = std::function<double(const Point&)>;

/// Axis-aligned rectangle removed from a grid, in domain coordinates.
struct Hole {
  Point lo;
  Point hi;
};

struct GridSpec {
  int dim = 2;
  Point extent{1.0, 1.0};
  double h = 0.05;
  double epsilon = 0.05;
  std::vector<Hole> holes;
};

/// Lattice discretization of a rectangle [0,extent] with spacing h. The outer
/// boundary layer (and the rim of any hole) forms the terminal set. Moves from
/// a node reach every lattice point within path distance epsilon.
class GridDomain {
 public:
  GridDomain(GridSpec spec, const BoundaryFn& boundary);
  /// Boundary values given per lattice label ("i" or "i,j"); every boundary
  /// node must be assigned.
  GridDomain(GridSpec spec, const std::unordered_map<std::string, double>& boundary);

  const BiasedGraph& graph() const { return *graph_; }
  std::shared_ptr<const BiasedGraph> shared_graph() const { return graph_; }
  const GridSpec& spec() const { return spec_; }

  int dim() const { return spec_.dim; }
  double h() const { return spec_.h; }
  double epsilon() const { return spec_.epsilon; }
  std::array<int, 2> counts() const { return {nx_, ny_}; }

  Point coord(NodeId x) const { return coords_.at(x); }
  std::array<int, 2> lattice_index(NodeId x) const { return index_of_.at(x); }
  std::optional<NodeId> node_at(int i, int j = 0) const;
  /// Node closest to a point, if the point lies on the lattice within h/2.
  std::optional<NodeId> nearest(const Point& p) const;

  /// True when every lattice point within path distance epsilon of x exists
  /// in the domain (no clipping by the outer boundary or a hole).
  bool full_ball(NodeId x) const;

  static std::string lattice_label(int dim, int i, int j);

 private:
  void build(const std::function<std::optional<double>(int, int, const Point&)>& boundary_value);

  GridSpec spec_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<Point> coords_;
  std::vector<std::array<int, 2>> index_of_;
  std::vector<long> node_of_;  ///< lattice slot -> node id or -1
  std::shared_ptr<const BiasedGraph> graph_;
};

double path_distance(const BiasedGraph& g, NodeId x, NodeId y);
double path_distance(const GridDomain& grid, NodeId x, NodeId y);

enum class Direction { unspecified, from_below, from_above };
enum class SolveStatus { converged, iteration_cap, diverged };

/// Node-indexed values plus solve metadata.
struct ValueField {
  std::vector<double> values;
  std::size_t iterations = 0;
  double residual = 0.0;           ///< sup-norm of the last update
  double equation_residual = 0.0;  ///< sup-norm of T(u) - u at exit
  Direction direction = Direction::unspecified;
  SolveStatus status = SolveStatus::converged;
  std::string diagnostic;

  double operator[](NodeId x) const { return values[x]; }
  std::size_t size() const { return values.size(); }
  bool ok() const { return status == SolveStatus::converged; }
};

const char* to_string(Direction d);
const char* to_string(SolveStatus s);

}  // namespace bamle
