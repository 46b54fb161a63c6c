#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bamle/core_model.hpp"
#include "bamle/game_sim.hpp"
#include "bamle/verify_suite.hpp"

namespace bamle {

/// Bad input file or option. `where` locates the problem (byte offset or JSON pointer).
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::string where)
      : std::runtime_error(where.empty() ? what : what + " (at " + where + ")"), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// A loaded problem: a graph, optionally backed by a grid, plus defaults.
struct Problem {
  std::string name;
  std::shared_ptr<const BiasedGraph> graph;
  std::shared_ptr<const GridDomain> grid;  ///< null for abstract graphs
  double beta = 1.0;
  double epsilon = 1.0;  ///< step: edge length on graphs, move radius on grids
  /// Rebuilds the problem at another step, when the construction allows it.
  std::function<Problem(double)> rescale;

  const BiasedGraph& space() const { return *graph; }
  BiasParams bias() const { return bias_at(beta); }
  BiasParams bias_at(double b) const { return b > 0.0 ? make_bias(b, epsilon) : unbiased(epsilon); }
};

Problem parse_problem(const std::string& json_text, const std::string& source = "<input>");
Problem load_problem(const std::string& path);

/// Field values keyed by node label, as written by write_field_json.
std::vector<double> parse_field(const std::string& json_text, const BiasedGraph& space);
std::vector<double> load_field(const std::string& path, const BiasedGraph& space);

/// 17 significant digits, round-trip exact.
std::string format_number(double v);

std::string field_json(const ValueField& field, const BiasedGraph& space,
                       const std::string& manifest = "manifest.json");
std::string field_csv(const std::vector<double>& values, const Problem& problem,
                      const std::string& manifest = "manifest.json");
std::string stats_json(const EpisodeStats& stats, const BiasedGraph& space,
                       const std::string& manifest = "manifest.json");
std::string stats_csv(const std::vector<EpisodeStats>& stats, const BiasedGraph& space,
                      const std::string& manifest = "manifest.json");
std::string report_json(const std::vector<CheckResult>& results, const BiasedGraph& space,
                        const std::string& manifest = "manifest.json");
std::string report_table(const std::vector<CheckResult>& results);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace bamle
