#ifndef SENSORNET_LEARNING_HPP
#define SENSORNET_LEARNING_HPP

#include <cstdint>
#include <vector>

#include "sensornet/game.hpp"

namespace sensornet::learn {

using game::NeighborMap;
using game::SensorGame;
using game::StrategyProfile;
using game::UtilityContext;
using game::UtilityMode;

struct LearningTrace {
  std::vector<StrategyProfile> profiles;  // profile chosen at each stage
  std::vector<double> objectives;         // global objective per stage
  bool converged = false;

  int stages() const { return static_cast<int>(profiles.size()); }
  const StrategyProfile& final_profile() const { return profiles.back(); }
  double final_objective() const { return objectives.back(); }
};

/// Each player independently maximizes the unconditional MI of its own
/// selection. Ties break to the lowest action index.
StrategyProfile local_greedy(const SensorGame& g);

/// Players decide in `order`; each maximizes MI conditioned on the
/// selections of all preceding players.
StrategyProfile sequential_greedy(const SensorGame& g,
                                  const std::vector<int>& order);

struct JsfpOptions {
  UtilityMode mode = UtilityMode::Full;
  const NeighborMap* nm = nullptr;  // required for Approx
  double inertia = 1.0;  // probability of switching to a better action
  int max_stages = 50;
  std::uint64_t seed = 0;
};

/// Joint strategy fictitious play. Stage 0 is the local-greedy warm start;
/// each later stage updates the running-average utilities with the one-step
/// look-back recursion and every player best-responds simultaneously.
/// Stops once the profile is unchanged over two consecutive stages.
LearningTrace jsfp(const SensorGame& g, const JsfpOptions& opt);

}  // namespace sensornet::learn

#endif
