#include "sensornet/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace sensornet::game {

namespace {

constexpr double kEqSlack = 1e-12;
constexpr std::size_t kMemoCap = 1 << 20;

std::string memo_key(std::span<const int> a, std::span<const int> c) {
  std::vector<int> sa(a.begin(), a.end()), sc(c.begin(), c.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sc.begin(), sc.end());
  std::string key;
  key.reserve(4 * (sa.size() + sc.size()) + 1);
  for (int v : sa) key.append(reinterpret_cast<const char*>(&v), sizeof(v));
  key.push_back('|');
  for (int v : sc) key.append(reinterpret_cast<const char*>(&v), sizeof(v));
  return key;
}

std::vector<int> all_players_except(int n, int skip) {
  std::vector<int> out;
  out.reserve(n - 1);
  for (int j = 0; j < n; ++j)
    if (j != skip) out.push_back(j);
  return out;
}

}  // namespace

GaussianEngine::GaussianEngine(gauss::JointGaussian jg, gauss::NoiseModel noise)
    : jg_(std::move(jg)),
      noise_(std::move(noise)),
      targets_(jg_.indices_of_kind(gauss::VarKind::Target)) {}

double GaussianEngine::conditional_mi(std::span<const int> a,
                                      std::span<const int> c) const {
  const std::string key = memo_key(a, c);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const double value = gauss::cond_mutual_info(jg_, a, targets_, c, noise_);
  std::lock_guard<std::mutex> lock(memo_mutex_);
  if (memo_.size() >= kMemoCap) memo_.clear();
  memo_.emplace(key, value);
  return value;
}

void SensorGame::validate() const {
  if (!engine) throw InvalidInput("SensorGame: missing engine");
  std::vector<std::set<int>> regions(action_sets.size());
  for (std::size_t i = 0; i < action_sets.size(); ++i) {
    if (action_sets[i].empty())
      throw InvalidInput("SensorGame: empty action set for player " +
                         std::to_string(i));
    for (const Action& a : action_sets[i]) {
      if (a.empty()) throw InvalidInput("SensorGame: empty action");
      regions[i].insert(a.begin(), a.end());
    }
  }
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i + 1; j < regions.size(); ++j)
      for (int loc : regions[i])
        if (regions[j].count(loc))
          throw InvalidInput("SensorGame: sensing regions overlap between players " +
                             std::to_string(i) + " and " + std::to_string(j));
}

void NeighborMap::validate(int n_players) const {
  if (static_cast<int>(neighbors.size()) != n_players)
    throw InvalidInput("NeighborMap: wrong player count");
  for (int i = 0; i < n_players; ++i) {
    std::set<int> seen;
    for (int j : neighbors[i]) {
      if (j == i || j < 0 || j >= n_players || !seen.insert(j).second)
        throw InvalidInput("NeighborMap: invalid entry for player " +
                           std::to_string(i));
    }
  }
}

std::vector<int> chosen_locations(const SensorGame& g, const StrategyProfile& p,
                                  std::span<const int> players) {
  std::vector<int> out;
  for (int j : players) {
    const Action& a = g.action_sets[j][p[j]];
    // Repeated locations stay: a twice-tasked sensor yields two independent
    // looks, and the engines score lists with exactly that convention.
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

double global_objective(const SensorGame& g, const StrategyProfile& p) {
  std::vector<int> everyone(g.num_players());
  std::iota(everyone.begin(), everyone.end(), 0);
  return g.engine->conditional_mi(chosen_locations(g, p, everyone), {});
}

double local_utility_full(const SensorGame& g, int player,
                          const StrategyProfile& p) {
  const std::vector<int> others = all_players_except(g.num_players(), player);
  return g.engine->conditional_mi(g.action_sets[player][p[player]],
                                  chosen_locations(g, p, others));
}

double local_utility_approx(const SensorGame& g, int player,
                            const StrategyProfile& p, const NeighborMap& nm) {
  return g.engine->conditional_mi(g.action_sets[player][p[player]],
                                  chosen_locations(g, p, nm.neighbors[player]));
}

double player_utility(const SensorGame& g, int player, const StrategyProfile& p,
                      const UtilityContext& ctx) {
  if (ctx.mode == UtilityMode::Full) return local_utility_full(g, player, p);
  if (!ctx.nm) throw InvalidInput("player_utility: approx mode needs a NeighborMap");
  return local_utility_approx(g, player, p, *ctx.nm);
}

double approx_error_term(const SensorGame& g, int player,
                         const StrategyProfile& p, const NeighborMap& nm) {
  std::vector<int> inner = nm.neighbors[player];
  inner.push_back(player);
  std::vector<int> outer;
  for (int j = 0; j < g.num_players(); ++j)
    if (std::find(inner.begin(), inner.end(), j) == inner.end()) outer.push_back(j);
  if (outer.empty()) return 0.0;
  return g.engine->conditional_mi(chosen_locations(g, p, outer),
                                  chosen_locations(g, p, inner));
}

double potentiality_gap(const SensorGame& g, int player, int action_a,
                        int action_b, const StrategyProfile& p,
                        const NeighborMap& nm) {
  StrategyProfile pa = p, pb = p;
  pa[player] = action_a;
  pb[player] = action_b;
  return approx_error_term(g, player, pa, nm) - approx_error_term(g, player, pb, nm);
}

EquilibriumResult is_epsilon_equilibrium(const SensorGame& g,
                                         const StrategyProfile& p, double eps,
                                         const UtilityContext& ctx) {
  EquilibriumResult res;
  res.worst_gain = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.num_players(); ++i) {
    const double base = player_utility(g, i, p, ctx);
    StrategyProfile q = p;
    for (int a = 0; a < g.num_actions(i); ++a) {
      if (a == p[i]) continue;
      q[i] = a;
      const double gain = player_utility(g, i, q, ctx) - base;
      if (gain > res.worst_gain) {
        res.worst_gain = gain;
        res.worst_player = i;
        res.worst_action = a;
      }
    }
    q[i] = p[i];
  }
  if (res.worst_player < 0) res.worst_gain = 0.0;  // single-action players only
  res.is_equilibrium = res.worst_gain <= eps + kEqSlack;
  return res;
}

void for_each_profile(const SensorGame& g, std::uint64_t guard,
                      const std::function<void(const StrategyProfile&)>& f) {
  std::uint64_t total = 1;
  for (int i = 0; i < g.num_players(); ++i) {
    total *= static_cast<std::uint64_t>(g.num_actions(i));
    if (total > guard)
      throw TooLargeToEnumerate("profile space exceeds guard of " +
                                std::to_string(guard));
  }
  StrategyProfile p(g.num_players(), 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    f(p);
    for (int i = g.num_players() - 1; i >= 0; --i) {
      if (++p[i] < g.num_actions(i)) break;
      p[i] = 0;
    }
  }
}

Theorem1Report theorem1_check(const SensorGame& g, const NeighborMap& nm,
                              std::uint64_t guard) {
  Theorem1Report report;
  const UtilityContext full{UtilityMode::Full, nullptr};
  const UtilityContext approx{UtilityMode::Approx, &nm};

  for_each_profile(g, guard, [&](const StrategyProfile& p) {
    for (int i = 0; i < g.num_players(); ++i) {
      const double du =
          std::abs(local_utility_full(g, i, p) - local_utility_approx(g, i, p, nm));
      report.delta_u = std::max(report.delta_u, du);
    }
  });

  for_each_profile(g, guard, [&](const StrategyProfile& p) {
    if (is_epsilon_equilibrium(g, p, 0.0, full).is_equilibrium)
      report.nash_full.push_back(p);
    if (is_epsilon_equilibrium(g, p, 0.0, approx).is_equilibrium)
      report.nash_approx.push_back(p);
  });

  const double bound = 2.0 * report.delta_u;
  auto describe = [](const StrategyProfile& p) {
    std::ostringstream os;
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ";" : "") << p[i];
    return os.str();
  };
  for (const StrategyProfile& p : report.nash_full) {
    auto res = is_epsilon_equilibrium(g, p, bound, approx);
    if (!res.is_equilibrium)
      report.violations.push_back("nash of G not " + std::to_string(bound) +
                                  "-eq of G~: " + describe(p));
  }
  for (const StrategyProfile& p : report.nash_approx) {
    auto res = is_epsilon_equilibrium(g, p, bound, full);
    if (!res.is_equilibrium)
      report.violations.push_back("nash of G~ not " + std::to_string(bound) +
                                  "-eq of G: " + describe(p));
  }
  return report;
}

bool corollary1_condition(const SensorGame& g, const NeighborMap& nm,
                          const std::vector<StrategyProfile>& nash_set,
                          double delta_u, std::uint64_t guard) {
  for (const StrategyProfile& star : nash_set) {
    for (int i = 0; i < g.num_players(); ++i) {
      const double best = local_utility_full(g, i, star);
      StrategyProfile q = star;
      for (int a = 0; a < g.num_actions(i); ++a) {
        if (a == star[i]) continue;
        q[i] = a;
        if (best - local_utility_full(g, i, q) < 2.0 * delta_u - kEqSlack)
          return false;
      }
    }
  }
  // Condition holds: every full-game Nash must be an exact Nash of the
  // approximate game.
  const UtilityContext approx{UtilityMode::Approx, &nm};
  for (const StrategyProfile& star : nash_set) {
    if (!is_epsilon_equilibrium(g, star, 0.0, approx).is_equilibrium)
      throw std::logic_error(
          "corollary1_condition: containment violated despite gap condition");
  }
  (void)guard;
  return true;
}

}  // namespace sensornet::game
