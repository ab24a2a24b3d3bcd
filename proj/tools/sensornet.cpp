#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sensornet/harness.hpp"

namespace {

using namespace sensornet;

int cmd_run(const std::string& manifest_path, std::uint64_t seed_override,
            const std::string& out_dir, const std::vector<std::string>& strategies,
            int case_override) {
  harness::RunManifest m = harness::RunManifest::load(manifest_path);
  if (seed_override) m.seed = seed_override;
  if (!out_dir.empty()) m.out_dir = out_dir;
  if (!strategies.empty()) m.strategies = strategies;
  if (case_override) m.case_id = case_override;
  const harness::ComparisonTable table = harness::run_case(m);
  for (const auto& r : table.rows)
    std::printf("%-20s %12s %8s\n", r.strategy.c_str(),
                harness::fmt(r.objective).c_str(), harness::fmt(r.stages).c_str());
  return 0;
}

int cmd_oracle(const std::string& manifest_path, std::uint64_t seed_override,
               int case_override) {
  harness::RunManifest m = harness::RunManifest::load(manifest_path);
  if (seed_override) m.seed = seed_override;
  if (case_override) m.case_id = case_override;
  const harness::CaseInstance inst = harness::build_case(m);
  const auto res = harness::exhaustive_oracle(inst.game);
  std::printf("profile %s\nvalue %s\n",
              harness::profile_string(res.profile).c_str(),
              harness::fmt(res.value).c_str());
  return 0;
}

int cmd_neighbors(const std::string& manifest_path, std::uint64_t seed_override,
                  int case_override) {
  harness::RunManifest m = harness::RunManifest::load(manifest_path);
  if (seed_override) m.seed = seed_override;
  if (case_override) m.case_id = case_override;
  const harness::CaseInstance inst = harness::build_case(m);
  auto dump = [](const char* name, const game::NeighborMap& nm) {
    std::printf("%s:\n", name);
    for (std::size_t i = 0; i < nm.neighbors.size(); ++i) {
      std::printf("  %zu:", i);
      for (int j : nm.neighbors[i]) std::printf(" %d", j);
      std::printf("\n");
    }
  };
  dump("khop", inst.khop_map);
  dump("correlation", inst.corr_map);
  return 0;
}

int cmd_bench() {
  const auto gr = harness::bench_gaussian({32, 64, 128, 256});
  std::printf("gaussian engine:\n");
  for (const auto& p : gr.points)
    std::printf("  size %4d  median %s s\n", p.size,
                harness::fmt(p.median_seconds).c_str());
  std::printf("  log-log slope %s\n", harness::fmt(gr.log_log_slope).c_str());
  const auto pr = harness::bench_particle({8, 9, 10, 11, 12});
  std::printf("particle engine:\n");
  for (const auto& p : pr.points)
    std::printf("  size %4d  median %s s\n", p.size,
                harness::fmt(p.median_seconds).c_str());
  std::printf("  median per-sensor ratio %s\n",
              harness::fmt(pr.median_step_ratio).c_str());
  return 0;
}

int cmd_selftest(std::uint64_t seed) {
  // Quick invariant pass over a random Gaussian game: alignment and
  // equilibrium of the exhaustive potential maximizer.
  std::mt19937_64 rng(seed ? seed : 99);
  std::normal_distribution<double> unit(0.0, 1.0);
  const int dim = 8;
  Eigen::MatrixXd f(dim, dim + 4);
  for (int r = 0; r < f.rows(); ++r)
    for (int c = 0; c < f.cols(); ++c) f(r, c) = unit(rng);
  Eigen::MatrixXd cov = f * f.transpose() / f.cols();
  std::vector<std::string> labels(dim);
  std::vector<gauss::VarKind> kinds(dim, gauss::VarKind::Sensing);
  for (int i = 0; i < dim; ++i) labels[i] = "s" + std::to_string(i);
  kinds[6] = kinds[7] = gauss::VarKind::Target;
  game::SensorGame g;
  g.engine = std::make_shared<game::GaussianEngine>(
      gauss::JointGaussian(labels, kinds, cov), gauss::NoiseModel(0.1));
  g.action_sets = {{{0}, {1}}, {{2}, {3}}, {{4}, {5}}};
  g.validate();

  const game::UtilityContext full{game::UtilityMode::Full, nullptr};
  double worst = 0.0;
  game::for_each_profile(g, 1000, [&](const game::StrategyProfile& p) {
    for (int i = 0; i < g.num_players(); ++i) {
      game::StrategyProfile q = p;
      for (int a = 0; a < g.num_actions(i); ++a) {
        q[i] = a;
        const double du = game::local_utility_full(g, i, q) -
                          game::local_utility_full(g, i, p);
        const double dphi =
            game::global_objective(g, q) - game::global_objective(g, p);
        worst = std::max(worst, std::abs(du - dphi));
      }
    }
  });
  const auto best = harness::exhaustive_oracle(g);
  const bool nash =
      game::is_epsilon_equilibrium(g, best.profile, 0.0, full).is_equilibrium;
  std::printf("alignment max |dU - dphi| = %s\n", harness::fmt(worst).c_str());
  std::printf("potential maximizer is nash: %s\n", nash ? "yes" : "no");
  if (worst > 1e-9 || !nash) {
    std::fprintf(stderr, "error: selftest invariants violated\n");
    return 1;
  }
  std::printf("selftest ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential-game sensor selection toolkit"};
  app.require_subcommand(1);

  std::string manifest_path, out_dir;
  std::vector<std::string> strategies;
  std::uint64_t seed = 0;
  int case_id = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_manifest) {
    if (needs_manifest)
      cmd->add_option("manifest", manifest_path, "manifest path")->required();
    cmd->add_option("--seed", seed, "override scenario seed");
    cmd->add_option("--case", case_id, "override case id");
  };

  auto* run = app.add_subcommand("run", "run a case from a manifest");
  add_common(run, true);
  run->add_option("--out-dir", out_dir, "output directory override");
  run->add_option("--strategies", strategies, "strategy subset");

  auto* oracle = app.add_subcommand("oracle", "exhaustive optimum for a case");
  add_common(oracle, true);

  auto* neighbors = app.add_subcommand("neighbors", "dump neighbor maps");
  add_common(neighbors, true);

  auto* bench = app.add_subcommand("bench", "utility-evaluation cost scaling");
  (void)bench;

  auto* selftest = app.add_subcommand("selftest", "run quick invariant checks");
  selftest->add_option("--seed", seed, "selftest seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(manifest_path, seed, out_dir, strategies, case_id);
    if (oracle->parsed()) return cmd_oracle(manifest_path, seed, case_id);
    if (neighbors->parsed()) return cmd_neighbors(manifest_path, seed, case_id);
    if (bench->parsed()) return cmd_bench();
    if (selftest->parsed()) return cmd_selftest(seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
