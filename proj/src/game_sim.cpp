#include "bamle/game_sim.hpp"

#include <random>
#include <stdexcept>

#include "bamle/dp_solver.hpp"
#include "bamle/parallel.hpp"

namespace bamle {

namespace {

constexpr std::size_t kEpisodeGrain = 512;

std::mt19937_64 episode_rng(std::uint64_t seed, std::size_t episode) {
  const auto k = static_cast<std::uint64_t>(episode);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void validate(const BiasedGraph& space, NodeId start, const Strategy& a, const Strategy& b,
              std::size_t n) {
  if (start >= space.size()) throw std::invalid_argument("start node out of range");
  if (space.is_terminal(start)) throw std::invalid_argument("start node must be non-terminal");
  if (n == 0) throw std::invalid_argument("episode count must be positive");
  for (const Strategy* s : {&a, &b}) {
    if (s->kind == StrategyKind::greedy && (!s->field || s->field->size() != space.size()))
      throw std::invalid_argument("greedy strategy needs a field over every node");
    if ((s->kind == StrategyKind::pull_toward || s->kind == StrategyKind::pull_away) &&
        s->target >= space.size())
      throw std::invalid_argument("strategy target out of range");
  }
}

struct Episode {
  double payoff = 0.0;
  std::size_t length = 0;
  bool terminated = false;
  // one-step increments of e^{-beta d(x, y)}, for the drift diagnostic
  double drift_sum = 0.0;
  double drift_sq = 0.0;
  std::size_t drift_n = 0;
};

template <class OnStep>
Episode run_episode(const BiasedGraph& space, double p_I, NodeId start, const Strategy& sI,
                    const Strategy& sII, std::size_t max_steps, std::mt19937_64& rng, OnStep&& on_step) {
  Episode ep;
  NodeId x = start;
  double running = 0.0;
  while (!space.is_terminal(x)) {
    if (ep.length == max_steps) return ep;
    running += space.running_payoff(x);
    const bool I_wins = uniform01(rng) < p_I;
    const double draw = uniform01(rng);
    const NodeId y = I_wins ? choose_move(sI, Player::I, x, space, draw)
                            : choose_move(sII, Player::II, x, space, draw);
    on_step(ep, x, y);
    x = y;
    ++ep.length;
  }
  ep.terminated = true;
  ep.payoff = space.terminal_payoff(x) + running;
  return ep;
}

template <class OnStep>
std::vector<Episode> run_episodes(const BiasedGraph& space, const BiasParams& bias, NodeId start,
                             const Strategy& sI, const Strategy& sII, const PlayConfig& cfg,
                             OnStep on_step) {
  validate(space, start, sI, sII, cfg.n);
  const double p_I = bias.win_prob_I();
  std::vector<Episode> eps(cfg.n);
  parallel_chunks(cfg.n, cfg.threads, kEpisodeGrain, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      auto rng = episode_rng(cfg.seed, k);
      eps[k] = run_episode(space, p_I, start, sI, sII, cfg.max_steps, rng, on_step);
    }
  });
  return eps;
}

}  // namespace

NodeId choose_move(const Strategy& s, Player who, NodeId x, const BiasedGraph& space, double u01) {
  auto mv = space.moves(x);
  if (mv.empty()) throw std::invalid_argument("node has no moves");
  switch (s.kind) {
    case StrategyKind::random: {
      auto k = static_cast<std::size_t>(u01 * static_cast<double>(mv.size()));
      return mv[std::min(k, mv.size() - 1)];
    }
    case StrategyKind::greedy: {
      const auto& f = *s.field;
      NodeId best = mv[0];
      for (NodeId y : mv) {
        if (who == Player::I ? f[y] > f[best] : f[y] < f[best]) best = y;
      }
      return best;
    }
    case StrategyKind::pull_toward:
    case StrategyKind::pull_away: {
      auto row = space.distance_row(s.target);
      const bool toward = s.kind == StrategyKind::pull_toward;
      NodeId best = mv[0];
      for (NodeId y : mv) {
        const double dy = (*row)[y];
        const double db = (*row)[best];
        if (toward ? dy < db : dy > db) best = y;
      }
      return best;
    }
  }
  return mv[0];
}

EpisodeStats play(const BiasedGraph& space, const BiasParams& bias, NodeId start,
                  const Strategy& strat_I, const Strategy& strat_II, const PlayConfig& config) {
  auto eps = run_episodes(space, bias, start, strat_I, strat_II, config, [](Episode&, NodeId, NodeId) {});
  EpisodeStats st;
  st.n_episodes = config.n;
  st.rng_seed = config.seed;
  st.start = start;
  double sum = 0.0;
  double length = 0.0;
  for (const auto& e : eps) {
    if (!e.terminated) continue;
    ++st.n_terminated;
    sum += e.payoff;
    length += static_cast<double>(e.length);
  }
  st.termination_rate = static_cast<double>(st.n_terminated) / static_cast<double>(config.n);
  if (st.n_terminated > 0) {
    const double m = static_cast<double>(st.n_terminated);
    st.mean_payoff = sum / m;
    st.mean_length = length / m;
    double ss = 0.0;
    for (const auto& e : eps)
      if (e.terminated) ss += (e.payoff - st.mean_payoff) * (e.payoff - st.mean_payoff);
    st.std_error = st.n_terminated > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  }
  return st;
}

PullBoundReport check_pull_bounds(const BiasedGraph& space, const BiasParams& bias, NodeId start,
                                  NodeId target, double L, const PlayConfig& config,
                                  const std::vector<double>* field) {
  if (target >= space.size() || !space.is_terminal(target))
    throw std::invalid_argument("pull target must be a terminal node");
  std::vector<double> values;
  if (field) {
    values = *field;
  } else {
    auto solved = solve(space, bias, SolveConfig{});
    if (!solved.ok()) throw std::runtime_error("could not solve the game for greedy opponents");
    values = std::move(solved.values);
  }
  PullBoundReport rep;
  rep.start = start;
  rep.target = target;
  rep.L = L;
  rep.distance = space.distance(start, target);
  const double b = bias.beta;
  const double g = space.terminal_payoff(target);
  const double far = 2.0 * bias.epsilon + rep.distance;
  // (e^{b s} - 1)/b and (1 - e^{-b s})/b with their b -> 0 limits.
  const double grow = b == 0.0 ? far : std::expm1(b * far) / b;
  const double decay = b == 0.0 ? rep.distance : -std::expm1(-b * rep.distance) / b;
  rep.lower_bound = std::exp(b * far) * g - grow * L;
  rep.upper_bound = std::exp(-b * rep.distance) * g + L * decay;

  auto greedy = Strategy::greedy(values);
  rep.toward = play(space, bias, start, Strategy::pull_toward(target), greedy, config);
  PlayConfig second = config;
  second.seed = config.seed ^ 0x9e3779b97f4a7c15ULL;
  rep.away = play(space, bias, start, greedy, Strategy::pull_away(target), second);
  rep.lower_holds = rep.toward.n_terminated > 0 &&
                    rep.toward.mean_payoff >= rep.lower_bound - 3.0 * rep.toward.std_error;
  // Non-terminating episodes are excluded from the mean rather than failed.
  rep.upper_holds = rep.away.n_terminated == 0 ||
                    rep.away.mean_payoff <= rep.upper_bound + 3.0 * rep.away.std_error;
  return rep;
}

DriftReport pull_away_drift(const BiasedGraph& space, const BiasParams& bias, NodeId start,
                            NodeId target, const Strategy& strat_I, const PlayConfig& config) {
  auto row = space.distance_row(target);
  const double b = bias.beta;
  auto eps = run_episodes(space, bias, start, strat_I, Strategy::pull_away(target), config,
                     [&](Episode& ep, NodeId x, NodeId y) {
                       const double inc = std::exp(-b * (*row)[y]) - std::exp(-b * (*row)[x]);
                       ep.drift_sum += inc;
                       ep.drift_sq += inc * inc;
                       ++ep.drift_n;
                     });
  DriftReport rep;
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& e : eps) {
    sum += e.drift_sum;
    sq += e.drift_sq;
    rep.samples += e.drift_n;
  }
  if (rep.samples > 1) {
    const double m = static_cast<double>(rep.samples);
    rep.mean_drift = sum / m;
    const double var = std::max(0.0, (sq - m * rep.mean_drift * rep.mean_drift) / (m - 1.0));
    rep.std_error = std::sqrt(var / m);
  }
  rep.nonnegative = rep.mean_drift >= -3.0 * rep.std_error;
  return rep;
}

}  // namespace bamle
