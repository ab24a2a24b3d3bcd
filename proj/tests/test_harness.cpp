#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>

#include "sensornet/harness.hpp"
#include "test_util.hpp"

using namespace sensornet;
using namespace sensornet::testutil;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

harness::RunManifest small_tracking_manifest(const std::string& out_dir) {
  harness::RunManifest m;
  m.scenario = "tracking";
  m.case_id = 1;
  m.seed = 9;
  m.strategies = {"local-greedy", "sequential-greedy", "jsfp-full",
                  "jsfp-full-inertia"};
  m.inertia = 0.4;
  m.inertia_reps = 2;
  m.max_stages = 6;
  m.out_dir = out_dir;
  m.tracking.particle_count = 40;
  return m;
}

}  // namespace

TEST_CASE("fmt and profile_string formatting") {
  CHECK(harness::fmt(1.0) == "1");
  CHECK(harness::fmt(0.5) == "0.5");
  CHECK(harness::fmt(0.001) == "0.001");
  CHECK(harness::fmt(-2.25) == "-2.25");
  CHECK(harness::profile_string({1, 0, 2}) == "1;0;2");
  CHECK(harness::profile_string({}) == "");
}

TEST_CASE("exhaustive_oracle maximizes and breaks ties low") {
  std::mt19937_64 rng(401);
  auto g = random_game(3, 3, 2, rng);
  const auto res = harness::exhaustive_oracle(g);

  double best = -1e300;
  game::for_each_profile(g, 100000, [&](const game::StrategyProfile& p) {
    best = std::max(best, game::global_objective(g, p));
  });
  CHECK(res.value == doctest::Approx(best));
  CHECK(game::global_objective(g, res.profile) == doctest::Approx(best));

  // Duplicate the winning action for its player; the oracle must keep the
  // lower action index.
  const int winner = 0;
  g.action_sets[winner].push_back(g.action_sets[winner][res.profile[winner]]);
  const auto res2 = harness::exhaustive_oracle(g);
  CHECK(res2.value == doctest::Approx(best));
  CHECK(res2.profile[winner] < static_cast<int>(g.action_sets[winner].size()) - 1);

  CHECK_THROWS_AS((void)harness::exhaustive_oracle(g, 3), TooLargeToEnumerate);
}

TEST_CASE("manifest save/load round trip") {
  harness::RunManifest m;
  m.scenario = "tracking";
  m.case_id = 2;
  m.seed = 77;
  m.strategies = {"jsfp-full", "oracle"};
  m.inertia = 0.25;
  m.inertia_reps = 5;
  m.khop = 1;
  m.corr_budget = 4;
  m.max_stages = 33;
  m.out_dir = "elsewhere";
  m.weather.ensemble_size = 128;
  m.weather.pre_cycles = 3;
  m.tracking.particle_count = 123;
  m.tracking.pf = 0.07;

  const std::string path = "manifest_roundtrip.json";
  m.save(path);
  const auto back = harness::RunManifest::load(path);
  CHECK(back.scenario == m.scenario);
  CHECK(back.case_id == m.case_id);
  CHECK(back.seed == m.seed);
  CHECK(back.strategies == m.strategies);
  CHECK(back.inertia == m.inertia);
  CHECK(back.inertia_reps == m.inertia_reps);
  CHECK(back.khop == m.khop);
  CHECK(back.corr_budget == m.corr_budget);
  CHECK(back.max_stages == m.max_stages);
  CHECK(back.out_dir == m.out_dir);
  CHECK(back.weather.ensemble_size == 128);
  CHECK(back.weather.pre_cycles == 3);
  CHECK(back.tracking.particle_count == 123);
  CHECK(back.tracking.pf == doctest::Approx(0.07));
  std::remove(path.c_str());

  CHECK_THROWS_AS((void)harness::RunManifest::load("no_such_manifest.json"),
                  InvalidInput);
}

TEST_CASE("build_case produces consistent tracking instances") {
  auto m = small_tracking_manifest("unused");
  const auto inst = harness::build_case(m);
  CHECK(inst.game.num_players() == 6);
  inst.khop_map.validate(6);
  inst.corr_map.validate(6);
  for (int i = 0; i < 6; ++i) CHECK(!inst.corr_map.neighbors[i].empty());

  // Larger hop radius never shrinks a neighborhood.
  auto m1 = m;
  m1.khop = 1;
  const auto inst1 = harness::build_case(m1);
  for (int i = 0; i < 6; ++i)
    CHECK(inst1.khop_map.neighbors[i].size() <=
          inst.khop_map.neighbors[i].size());

  auto bad = m;
  bad.scenario = "nonsense";
  CHECK_THROWS_AS((void)harness::build_case(bad), InvalidInput);
}

TEST_CASE("run_case outputs are complete and byte-stable") {
  const fs::path base = fs::temp_directory_path() / "sensornet_harness_test";
  fs::remove_all(base);
  auto m = small_tracking_manifest((base / "runA").string());
  const auto table = harness::run_case(m);

  const fs::path dir = base / "runA" / "tracking_case1_seed9";
  REQUIRE(fs::exists(dir));
  for (const char* f : {"table.csv", "table.txt", "timings.csv",
                        "manifest.json", "local-greedy.csv",
                        "sequential-greedy.csv", "jsfp-full.csv",
                        "jsfp-full-inertia.csv", "jsfp-full-inertia_rep0.csv",
                        "jsfp-full-inertia_rep1.csv"})
    CHECK(fs::exists(dir / f));

  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows[0].strategy == "local-greedy");

  // The table row must agree with an out-of-band evaluation of the same
  // strategy on a freshly built case.
  const auto inst = harness::build_case(m);
  CHECK(table.rows[0].objective ==
        doctest::Approx(
            game::global_objective(inst.game, learn::local_greedy(inst.game))));

  // Re-running the manifest elsewhere reproduces every deterministic file.
  auto m2 = m;
  m2.out_dir = (base / "runB").string();
  (void)harness::run_case(m2);
  const fs::path dir2 = base / "runB" / "tracking_case1_seed9";
  for (const char* f : {"table.csv", "table.txt", "local-greedy.csv",
                        "sequential-greedy.csv", "jsfp-full.csv",
                        "jsfp-full-inertia.csv"})
    CHECK(slurp(dir / f) == slurp(dir2 / f));
  fs::remove_all(base);
}

TEST_CASE("worker count comes from the environment") {
  unsetenv("SENSORNET_WORKERS");
  CHECK(harness::worker_count_from_env() == 1);
  setenv("SENSORNET_WORKERS", "3", 1);
  CHECK(harness::worker_count_from_env() == 3);
  setenv("SENSORNET_WORKERS", "0", 1);
  CHECK(harness::worker_count_from_env() == 1);
  unsetenv("SENSORNET_WORKERS");
}

TEST_CASE("benchmarks produce sane timing points") {
  const auto g = harness::bench_gaussian({8, 16, 32});
  REQUIRE(g.points.size() == 3);
  for (const auto& p : g.points) CHECK(p.median_seconds > 0.0);
  CHECK(std::isfinite(g.log_log_slope));

  const auto pr = harness::bench_particle({4, 6, 8});
  REQUIRE(pr.points.size() == 3);
  for (const auto& p : pr.points) CHECK(p.median_seconds > 0.0);
  CHECK(pr.median_step_ratio > 0.0);
}
