#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bamle/core_model.hpp"

namespace bamle {

enum class StrategyKind { pull_toward, pull_away, greedy, random };

/// Move rule for one player. Greedy maximizes the field for player I and
/// minimizes it for player II. Ties go to the lowest node id.
struct Strategy {
  StrategyKind kind = StrategyKind::random;
  NodeId target = 0;
  std::shared_ptr<const std::vector<double>> field;

  static Strategy pull_toward(NodeId y) { return {StrategyKind::pull_toward, y, nullptr}; }
  static Strategy pull_away(NodeId y) { return {StrategyKind::pull_away, y, nullptr}; }
  static Strategy greedy(std::vector<double> values) {
    return {StrategyKind::greedy, 0, std::make_shared<const std::vector<double>>(std::move(values))};
  }
  static Strategy uniform() { return {}; }
};

enum class Player { I, II };

struct PlayConfig {
  std::size_t n = 100'000;
  std::uint64_t seed = 0;
  std::size_t max_steps = 1'000'000;
  unsigned threads = 0;
};

struct EpisodeStats {
  std::size_t n_episodes = 0;
  std::size_t n_terminated = 0;
  double mean_payoff = 0.0;  ///< over terminated episodes
  double std_error = 0.0;
  double termination_rate = 0.0;
  double mean_length = 0.0;  ///< over terminated episodes
  std::uint64_t rng_seed = 0;
  NodeId start = 0;
};

/// Move chosen by a strategy from x. `u01` is a uniform draw used only by the
/// random strategy.
NodeId choose_move(const Strategy& s, Player who, NodeId x, const BiasedGraph& space, double u01);

/// Independent episodes of biased tug-of-war from `start`. Player I wins each
/// toss with probability rho/(rho+1). Episode k draws from a generator seeded
/// by (seed, k), so the result does not depend on the worker count.
EpisodeStats play(const BiasedGraph& space, const BiasParams& bias, NodeId start,
                  const Strategy& strat_I, const Strategy& strat_II, const PlayConfig& config);

struct PullBoundReport {
  NodeId start = 0;
  NodeId target = 0;
  double distance = 0.0;
  double L = 0.0;
  double lower_bound = 0.0;  ///< guarantee for I pulling toward the target
  double upper_bound = 0.0;  ///< cap enforced by II pulling away
  EpisodeStats toward;       ///< I pull-toward vs greedy II
  EpisodeStats away;         ///< greedy I vs II pull-away
  bool lower_holds = false;  ///< mean >= lower_bound - 3 SE
  bool upper_holds = false;  ///< mean <= upper_bound + 3 SE
  bool ok() const { return lower_holds && upper_holds; }
};

/// Runs both strategy-bound experiments. Greedy opponents use `field`, or the
/// solved game value when none is given.
PullBoundReport check_pull_bounds(const BiasedGraph& space, const BiasParams& bias, NodeId start,
                                  NodeId target, double L, const PlayConfig& config,
                                  const std::vector<double>* field = nullptr);

struct DriftReport {
  double mean_drift = 0.0;  ///< average one-step change of e^{-beta d(x_k, y)}
  double std_error = 0.0;
  std::size_t samples = 0;
  bool nonnegative = false;  ///< mean_drift >= -3 SE
};

/// Per-step drift of e^{-beta d(x_k, y)} while II pulls away from y and I
/// follows strat_I; the sequence is expected to be a submartingale.
DriftReport pull_away_drift(const BiasedGraph& space, const BiasParams& bias, NodeId start,
                            NodeId target, const Strategy& strat_I, const PlayConfig& config);

}  // namespace bamle
