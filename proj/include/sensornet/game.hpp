#ifndef SENSORNET_GAME_HPP
#define SENSORNET_GAME_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sensornet/gauss_info.hpp"

namespace sensornet::game {

/// Information engine behind a sensor game. Implementations compute
/// I(x_t ; z_A | z_C) for sensing-location id sets A and C; the target set
/// is fixed inside the engine.
class InfoEngine {
 public:
  virtual ~InfoEngine() = default;
  virtual double conditional_mi(std::span<const int> a,
                                std::span<const int> c) const = 0;
};

/// Gaussian engine: location ids are indices into the JointGaussian; the
/// conditioning set always includes measurement noise. Evaluations are
/// memoized behind a mutex since learning revisits profiles often.
class GaussianEngine : public InfoEngine {
 public:
  GaussianEngine(gauss::JointGaussian jg, gauss::NoiseModel noise);

  double conditional_mi(std::span<const int> a,
                        std::span<const int> c) const override;

  const gauss::JointGaussian& joint() const { return jg_; }
  const gauss::NoiseModel& noise() const { return noise_; }
  const std::vector<int>& targets() const { return targets_; }

 private:
  gauss::JointGaussian jg_;
  gauss::NoiseModel noise_;
  std::vector<int> targets_;
  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<std::string, double> memo_;
};

using Action = std::vector<int>;  // sensing-location ids, size n_i >= 1

/// Players, per-player action sets, and the utility engine. Immutable after
/// construction; sensing regions must be disjoint across players.
struct SensorGame {
  std::vector<std::vector<Action>> action_sets;
  std::shared_ptr<const InfoEngine> engine;

  int num_players() const { return static_cast<int>(action_sets.size()); }
  int num_actions(int player) const {
    return static_cast<int>(action_sets[player].size());
  }
  void validate() const;
};

using StrategyProfile = std::vector<int>;  // one action index per player

struct NeighborMap {
  std::vector<std::vector<int>> neighbors;  // per player, ordered, excludes self
  void validate(int n_players) const;
};

enum class UtilityMode { Full, Approx };

struct UtilityContext {
  UtilityMode mode = UtilityMode::Full;
  const NeighborMap* nm = nullptr;  // required for Approx
};

double global_objective(const SensorGame& g, const StrategyProfile& p);

/// Eq-style full local utility: I(x_t ; z_{s_i} | z_{s_-i}).
double local_utility_full(const SensorGame& g, int player,
                          const StrategyProfile& p);

/// Approximate utility conditioned only on the neighbors' selections.
double local_utility_approx(const SensorGame& g, int player,
                            const StrategyProfile& p, const NeighborMap& nm);

double player_utility(const SensorGame& g, int player, const StrategyProfile& p,
                      const UtilityContext& ctx);

/// Action-dependent part of the approximation error:
/// I(x_t ; z_{-N_i} | z_{s_i U N_i}).
double approx_error_term(const SensorGame& g, int player,
                         const StrategyProfile& p, const NeighborMap& nm);

/// Difference of the error term at two of player i's actions; zero means the
/// approximate utility preserves this pairwise preference exactly.
double potentiality_gap(const SensorGame& g, int player, int action_a,
                        int action_b, const StrategyProfile& p,
                        const NeighborMap& nm);

struct EquilibriumResult {
  bool is_equilibrium = false;
  double worst_gain = 0.0;
  int worst_player = -1;
  int worst_action = -1;
};

/// Checks the unilateral-deviation condition with absolute slack 1e-12.
EquilibriumResult is_epsilon_equilibrium(const SensorGame& g,
                                         const StrategyProfile& p, double eps,
                                         const UtilityContext& ctx);

struct Theorem1Report {
  double delta_u = 0.0;
  std::vector<StrategyProfile> nash_full;    // Nash equilibria of G
  std::vector<StrategyProfile> nash_approx;  // Nash equilibria of G~
  std::vector<std::string> violations;       // expected empty
};

/// Exhaustive check that every Nash equilibrium of the full game is a
/// 2*delta_u-equilibrium of the approximate game, and conversely (Lemma 2
/// direction with eps~ = 0). Guard on the profile count.
Theorem1Report theorem1_check(const SensorGame& g, const NeighborMap& nm,
                              std::uint64_t guard = 1000000);

/// Second-best-gap condition: at every Nash profile of G each non-equilibrium
/// action is worse by at least 2*delta_u. When it holds, Nash(G) is contained
/// in Nash(G~) (verified by enumeration).
bool corollary1_condition(const SensorGame& g, const NeighborMap& nm,
                          const std::vector<StrategyProfile>& nash_set,
                          double delta_u, std::uint64_t guard = 1000000);

/// Iterates f over every profile of g. Throws TooLargeToEnumerate past guard.
void for_each_profile(const SensorGame& g, std::uint64_t guard,
                      const std::function<void(const StrategyProfile&)>& f);

/// Concatenated chosen locations for players in `players` (pass all for the
/// full selection); preserves player order, locations in action order.
/// Repeats are kept: a twice-tasked sensor counts as two independent looks.
std::vector<int> chosen_locations(const SensorGame& g, const StrategyProfile& p,
                                  std::span<const int> players);

}  // namespace sensornet::game

#endif
