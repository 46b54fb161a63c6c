#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bamle/io.hpp"

namespace bamle {

/// Knobs shared by the built-in problems; unset values take preset defaults.
struct PresetOptions {
  std::optional<double> beta;
  std::optional<double> epsilon;
  std::optional<double> A;      ///< cone slope
  std::optional<double> a;      ///< ray family parameter
  std::optional<int> N;         ///< path / ray length
  std::optional<int> n;         ///< grid intervals per axis
  std::optional<double> lo;     ///< left payoff on paths
  std::optional<double> hi;     ///< right payoff on paths
  std::optional<double> p;      ///< three-node payoffs
  std::optional<double> q;
  std::optional<double> c;      ///< constant boundary value
  std::string boundary = "linear-x";
};

/// Names: three-node, path-1d, cone-1d, square-2d, counterexample-ray, single-terminal.
Problem make_preset(const std::string& name, const PresetOptions& opts = {});
std::vector<std::string> preset_names();

/// Named boundary data on the unit square: linear-x, mixed, spike, negative, cone, constant.
BoundaryFn square_boundary(const std::string& name, double beta, double A = 1.0, double c = 0.0);
std::vector<std::string> boundary_names();

/// The ray family u_a: 0 at (0,0), a(1 - 2^-x) at (x,0), payoffs on the two stubs.
std::vector<double> counterexample_field(const BiasedGraph& ray, double a);

struct CorpusEntry {
  std::string name;
  Problem problem;
};

/// Regression problems used by the property checks.
std::vector<CorpusEntry> corpus();

}  // namespace bamle
