#include "sensornet/learning.hpp"

#include <random>

namespace sensornet::learn {

namespace {

int argmax_lowest(const std::vector<double>& values) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(values.size()); ++a)
    if (values[a] > values[best]) best = a;
  return best;
}

}  // namespace

StrategyProfile local_greedy(const SensorGame& g) {
  StrategyProfile p(g.num_players(), 0);
  for (int i = 0; i < g.num_players(); ++i) {
    std::vector<double> vals(g.num_actions(i));
    for (int a = 0; a < g.num_actions(i); ++a)
      vals[a] = g.engine->conditional_mi(g.action_sets[i][a], {});
    p[i] = argmax_lowest(vals);
  }
  return p;
}

StrategyProfile sequential_greedy(const SensorGame& g,
                                  const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != g.num_players())
    throw InvalidInput("sequential_greedy: order must be a player permutation");
  StrategyProfile p(g.num_players(), 0);
  std::vector<int> decided;
  for (int i : order) {
    const std::vector<int> cond = game::chosen_locations(g, p, decided);
    std::vector<double> vals(g.num_actions(i));
    for (int a = 0; a < g.num_actions(i); ++a)
      vals[a] = g.engine->conditional_mi(g.action_sets[i][a], cond);
    p[i] = argmax_lowest(vals);
    decided.push_back(i);
  }
  return p;
}

LearningTrace jsfp(const SensorGame& g, const JsfpOptions& opt) {
  if (opt.inertia < 0.0 || opt.inertia > 1.0)
    throw InvalidInput("jsfp: inertia must lie in [0,1]");
  if (opt.max_stages < 1) throw InvalidInput("jsfp: max_stages must be >= 1");
  const UtilityContext ctx{opt.mode, opt.nm};
  if (opt.mode == UtilityMode::Approx && !opt.nm)
    throw InvalidInput("jsfp: approx mode needs a NeighborMap");

  LearningTrace trace;
  StrategyProfile current = local_greedy(g);
  trace.profiles.push_back(current);
  trace.objectives.push_back(game::global_objective(g, current));

  std::vector<std::vector<double>> avg(g.num_players());
  for (int i = 0; i < g.num_players(); ++i) avg[i].assign(g.num_actions(i), 0.0);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int unchanged = 0;
  for (int t = 1; t < opt.max_stages; ++t) {
    const StrategyProfile prev = current;
    // All utilities are evaluated against the frozen previous profile before
    // any action update commits.
    for (int i = 0; i < g.num_players(); ++i) {
      StrategyProfile q = prev;
      for (int a = 0; a < g.num_actions(i); ++a) {
        q[i] = a;
        const double u = game::player_utility(g, i, q, ctx);
        avg[i][a] = ((t - 1) * avg[i][a] + u) / static_cast<double>(t);
      }
    }
    // Inertia draws happen in fixed player order; staying put never draws.
    for (int i = 0; i < g.num_players(); ++i) {
      const int best = argmax_lowest(avg[i]);
      if (best == prev[i]) {
        current[i] = prev[i];
      } else if (opt.inertia >= 1.0 || unit(rng) < opt.inertia) {
        current[i] = best;
      } else {
        current[i] = prev[i];
      }
    }
    trace.profiles.push_back(current);
    trace.objectives.push_back(game::global_objective(g, current));
    unchanged = (current == prev) ? unchanged + 1 : 0;
    if (unchanged >= 2) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

}  // namespace sensornet::learn
