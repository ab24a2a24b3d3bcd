#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "sensornet/errors.hpp"
#include "sensornet/game.hpp"
#include "test_util.hpp"

using namespace sensornet;
using namespace sensornet::testutil;

namespace {

game::NeighborMap all_others(int n_players) {
  game::NeighborMap nm;
  nm.neighbors.resize(n_players);
  for (int i = 0; i < n_players; ++i)
    for (int j = 0; j < n_players; ++j)
      if (j != i) nm.neighbors[i].push_back(j);
  return nm;
}

game::NeighborMap nobody(int n_players) {
  game::NeighborMap nm;
  nm.neighbors.resize(n_players);
  return nm;
}

// Exhaustive Nash set computed with plain loops, independent of
// is_epsilon_equilibrium.
std::vector<game::StrategyProfile> brute_nash(const game::SensorGame& g,
                                              const game::UtilityContext& ctx) {
  std::vector<game::StrategyProfile> out;
  game::for_each_profile(g, 1000000, [&](const game::StrategyProfile& p) {
    for (int i = 0; i < g.num_players(); ++i) {
      const double here = game::player_utility(g, i, p, ctx);
      for (int a = 0; a < g.num_actions(i); ++a) {
        game::StrategyProfile q = p;
        q[i] = a;
        if (game::player_utility(g, i, q, ctx) > here + 1e-12) return;
      }
    }
    out.push_back(p);
  });
  return out;
}

}  // namespace

TEST_CASE("validate rejects overlapping sensing regions") {
  std::mt19937_64 rng(1);
  game::SensorGame g = random_game(2, 2, 1, rng);
  g.action_sets[1][0] = g.action_sets[0][0];  // reuse player 0's location
  CHECK_THROWS_AS(g.validate(), InvalidInput);
}

TEST_CASE("global objective is the full-selection MI") {
  std::mt19937_64 rng(2);
  auto g = random_game(3, 2, 2, rng);
  game::StrategyProfile p{1, 0, 1};
  std::vector<int> all{0, 1, 2};
  const auto locs = game::chosen_locations(g, p, all);
  CHECK(game::global_objective(g, p) ==
        doctest::Approx(g.engine->conditional_mi(locs, {})).epsilon(1e-12));
}

TEST_CASE("full utility is exactly aligned with the objective") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = random_game(3, 3, 2, rng);
    game::for_each_profile(g, 1000, [&](const game::StrategyProfile& p) {
      for (int i = 0; i < g.num_players(); ++i) {
        for (int a = 0; a < g.num_actions(i); ++a) {
          game::StrategyProfile q = p;
          q[i] = a;
          const double du = game::local_utility_full(g, i, q) -
                            game::local_utility_full(g, i, p);
          const double dphi =
              game::global_objective(g, q) - game::global_objective(g, p);
          CHECK(du == doctest::Approx(dphi).epsilon(1e-9));
        }
      }
    });
  }
}

TEST_CASE("chain-rule decomposition of the objective") {
  std::mt19937_64 rng(9);
  auto g = random_game(3, 2, 2, rng);
  game::StrategyProfile p{0, 1, 1};
  for (int i = 0; i < 3; ++i) {
    std::vector<int> others;
    for (int j = 0; j < 3; ++j)
      if (j != i) others.push_back(j);
    const auto rest = game::chosen_locations(g, p, others);
    const double phi = game::global_objective(g, p);
    const double decomposed = game::local_utility_full(g, i, p) +
                              g.engine->conditional_mi(rest, {});
    CHECK(phi == doctest::Approx(decomposed).epsilon(1e-9));
  }
}

TEST_CASE("approx utility with all-others neighborhood equals full") {
  std::mt19937_64 rng(13);
  auto g = random_game(3, 2, 2, rng);
  const auto nm = all_others(3);
  game::for_each_profile(g, 1000, [&](const game::StrategyProfile& p) {
    for (int i = 0; i < 3; ++i)
      CHECK(game::local_utility_approx(g, i, p, nm) ==
            doctest::Approx(game::local_utility_full(g, i, p)).epsilon(1e-9));
  });
}

TEST_CASE("approx utility with empty neighborhood is plain MI") {
  std::mt19937_64 rng(19);
  auto g = random_game(3, 2, 1, rng);
  const auto nm = nobody(3);
  game::StrategyProfile p{1, 1, 0};
  for (int i = 0; i < 3; ++i) {
    const std::vector<int> me{i};
    const auto own = game::chosen_locations(g, p, me);
    CHECK(game::local_utility_approx(g, i, p, nm) ==
          doctest::Approx(g.engine->conditional_mi(own, {})).epsilon(1e-12));
  }
}

TEST_CASE("approx error term completes the full utility") {
  // u_i = u~_i + I(x_t ; z_{-N_i} | z_{s_i U N_i}) - I(x_t ; z_{-N_i} | z_{N_i});
  // only the first correction depends on s_i, which is what
  // approx_error_term returns.
  std::mt19937_64 rng(29);
  auto g = random_game(4, 2, 2, rng);
  game::NeighborMap nm;
  nm.neighbors = {{1}, {0, 2}, {1, 3}, {2}};
  game::for_each_profile(g, 100, [&](const game::StrategyProfile& p) {
    for (int i = 0; i < 4; ++i) {
      const auto ngb = game::chosen_locations(g, p, nm.neighbors[i]);
      const std::vector<int> far_players = [&] {
        std::vector<int> out;
        for (int j = 0; j < 4; ++j) {
          if (j == i) continue;
          if (std::find(nm.neighbors[i].begin(), nm.neighbors[i].end(), j) ==
              nm.neighbors[i].end())
            out.push_back(j);
        }
        return out;
      }();
      const auto far = game::chosen_locations(g, p, far_players);
      const double fixed = g.engine->conditional_mi(far, ngb);
      const double lhs = game::local_utility_full(g, i, p);
      const double rhs = game::local_utility_approx(g, i, p, nm) +
                         game::approx_error_term(g, i, p, nm) - fixed;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  });
}

TEST_CASE("potentiality gap vanishes for the all-others neighborhood") {
  std::mt19937_64 rng(37);
  auto g = random_game(3, 3, 2, rng);
  const auto nm = all_others(3);
  game::StrategyProfile p{0, 2, 1};
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        CHECK(std::abs(game::potentiality_gap(g, i, a, b, p, nm)) < 1e-9);
}

TEST_CASE("potentiality gap is the difference of error terms") {
  std::mt19937_64 rng(41);
  auto g = random_game(3, 2, 2, rng);
  game::NeighborMap nm;
  nm.neighbors = {{1}, {0}, {}};
  game::StrategyProfile p{0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    game::StrategyProfile pa = p, pb = p;
    pa[i] = 0;
    pb[i] = 1;
    const double expect = game::approx_error_term(g, i, pa, nm) -
                          game::approx_error_term(g, i, pb, nm);
    CHECK(game::potentiality_gap(g, i, 0, 1, p, nm) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("is_epsilon_equilibrium agrees with brute force") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 4; ++trial) {
    auto g = random_game(3, 2, 2, rng);
    game::UtilityContext ctx;  // Full
    const auto nash = brute_nash(g, ctx);
    CHECK(!nash.empty());  // finite potential games always have one
    game::for_each_profile(g, 1000, [&](const game::StrategyProfile& p) {
      const bool expect =
          std::find(nash.begin(), nash.end(), p) != nash.end();
      const auto res = game::is_epsilon_equilibrium(g, p, 0.0, ctx);
      CHECK(res.is_equilibrium == expect);
      if (!res.is_equilibrium) {
        // Reported deviation must actually gain worst_gain.
        game::StrategyProfile q = p;
        q[res.worst_player] = res.worst_action;
        const double gain =
            game::player_utility(g, res.worst_player, q, ctx) -
            game::player_utility(g, res.worst_player, p, ctx);
        CHECK(gain == doctest::Approx(res.worst_gain).epsilon(1e-9));
        CHECK(gain > 0.0);
      }
    });
  }
}

TEST_CASE("epsilon slack admits near-equilibria") {
  std::mt19937_64 rng(53);
  auto g = random_game(2, 2, 1, rng);
  game::UtilityContext ctx;
  // Every profile is an eps-equilibrium for huge eps.
  game::for_each_profile(g, 100, [&](const game::StrategyProfile& p) {
    CHECK(game::is_epsilon_equilibrium(g, p, 1e9, ctx).is_equilibrium);
  });
}

TEST_CASE("theorem 1 bound holds on random games") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 6; ++trial) {
    auto g = random_game(3, 2, 2, rng);
    game::NeighborMap nm;
    nm.neighbors = {{1}, {0, 2}, {1}};
    const auto rep = game::theorem1_check(g, nm);
    CHECK(rep.violations.empty());
    CHECK(rep.delta_u >= 0.0);
    CHECK(!rep.nash_full.empty());
    CHECK(!rep.nash_approx.empty());

    // delta_u oracle: max |u_i - u~_i| over all profiles and players, with
    // both utilities evaluated straight through the engine.
    double du = 0.0;
    game::for_each_profile(g, 100000, [&](const game::StrategyProfile& p) {
      for (int i = 0; i < 3; ++i) {
        std::vector<int> others;
        for (int j = 0; j < 3; ++j)
          if (j != i) others.push_back(j);
        const auto own = g.action_sets[i][p[i]];
        const double u_full = g.engine->conditional_mi(
            own, game::chosen_locations(g, p, others));
        const double u_approx = g.engine->conditional_mi(
            own, game::chosen_locations(g, p, nm.neighbors[i]));
        du = std::max(du, std::abs(u_full - u_approx));
      }
    });
    CHECK(rep.delta_u == doctest::Approx(du).epsilon(1e-9));
  }
}

TEST_CASE("theorem 1 with all-others neighborhood has delta_u ~ 0") {
  std::mt19937_64 rng(61);
  auto g = random_game(3, 2, 1, rng);
  const auto rep = game::theorem1_check(g, all_others(3));
  CHECK(rep.delta_u < 1e-9);
  CHECK(rep.violations.empty());
  // With delta_u ~ 0 the two Nash sets coincide.
  CHECK(rep.nash_full == rep.nash_approx);
}

TEST_CASE("corollary 1 condition implies Nash containment") {
  std::mt19937_64 rng(67);
  int holds = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_game(3, 2, 2, rng);
    game::NeighborMap nm;
    nm.neighbors = {{1}, {0, 2}, {1}};
    const auto rep = game::theorem1_check(g, nm);
    if (game::corollary1_condition(g, nm, rep.nash_full, rep.delta_u)) {
      ++holds;
      for (const auto& p : rep.nash_full)
        CHECK(std::find(rep.nash_approx.begin(), rep.nash_approx.end(), p) !=
              rep.nash_approx.end());
    }
  }
  // Informational: the condition should hold at least sometimes on these
  // well-separated random games.
  CHECK(holds >= 1);
}

TEST_CASE("for_each_profile enumerates the whole product space") {
  std::mt19937_64 rng(71);
  auto g = random_game(3, 3, 1, rng);
  int count = 0;
  game::for_each_profile(g, 1000, [&](const game::StrategyProfile&) { ++count; });
  CHECK(count == 27);
  CHECK_THROWS_AS(
      game::for_each_profile(g, 5, [](const game::StrategyProfile&) {}),
      TooLargeToEnumerate);
}

TEST_CASE("memoized engine repeats evaluations exactly") {
  std::mt19937_64 rng(73);
  auto g = random_game(2, 2, 1, rng);
  const std::vector<int> a{0, 2}, c{1};
  const double first = g.engine->conditional_mi(a, c);
  for (int k = 0; k < 5; ++k) CHECK(g.engine->conditional_mi(a, c) == first);
  // Order of ids must not matter.
  const std::vector<int> a2{2, 0};
  CHECK(g.engine->conditional_mi(a2, c) == first);
}

TEST_CASE("chosen_locations preserves order and repeated tasking") {
  game::SensorGame g;
  std::mt19937_64 rng(79);
  g = random_game(3, 2, 1, rng);
  game::StrategyProfile p{1, 0, 1};
  const std::vector<int> players{2, 0};
  CHECK(game::chosen_locations(g, p, players) == std::vector<int>{5, 1});

  // A doubled location within an action stays doubled: engines score the
  // second tasking as an independent look at the same sensor.
  g.action_sets[2][1] = {4, 4};
  CHECK(game::chosen_locations(g, p, players) == std::vector<int>{4, 4, 1});
}
