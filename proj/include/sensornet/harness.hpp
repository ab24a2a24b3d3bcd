#ifndef SENSORNET_HARNESS_HPP
#define SENSORNET_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sensornet/game.hpp"
#include "sensornet/learning.hpp"
#include "sensornet/lorenz.hpp"
#include "sensornet/tracking.hpp"

namespace sensornet::harness {

/// Everything that determines a run; re-running a manifest reproduces the
/// deterministic outputs byte for byte (timings go to a sidecar file).
struct RunManifest {
  std::string scenario = "weather";  // "weather" | "tracking"
  int case_id = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> strategies;  // empty = all
  double inertia = 0.3;
  int inertia_reps = 20;
  int khop = 2;
  int corr_budget = 0;  // 0 = ceil((N-1)/2) locations
  int max_stages = 50;
  std::string out_dir = "runs";
  std::string version_tag = "sensornet-0.1";
  lorenz::WeatherConfig weather;
  tracking::TrackingConfig tracking;

  static RunManifest load(const std::string& path);
  void save(const std::string& path) const;
};

struct OracleResult {
  game::StrategyProfile profile;
  double value = 0.0;
};

/// Full enumeration of the joint strategy space; lowest-lexicographic
/// profile wins ties. Guarded against oversized games.
OracleResult exhaustive_oracle(const game::SensorGame& g,
                               std::uint64_t guard = 10000000);

struct ComparisonRow {
  std::string strategy;
  double objective = 0.0;
  double stages = 1.0;  // mean over reps for inertia strategies
  double wall_seconds = 0.0;
  std::string trace_file;
};

struct ComparisonTable {
  std::string scenario;
  int case_id = 0;
  std::uint64_t seed = 0;
  std::vector<ComparisonRow> rows;
};

/// A case instance ready to play: the game plus both neighbor maps.
struct CaseInstance {
  game::SensorGame game;
  game::NeighborMap khop_map;
  game::NeighborMap corr_map;
};

CaseInstance build_case(const RunManifest& m);

/// Runs every requested strategy, writes per-stage traces and the
/// comparison table (CSV and aligned text) under out_dir.
ComparisonTable run_case(const RunManifest& m);

struct BenchPoint {
  int size = 0;
  double median_seconds = 0.0;
};

struct BenchReport {
  std::vector<BenchPoint> points;
  double log_log_slope = 0.0;     // Gaussian engine
  double median_step_ratio = 0.0; // particle engine
};

/// Timing of the Gaussian conditional-MI evaluation vs conditioning-set
/// size, bypassing the memo. Fits a log-log slope when >= 2 sizes given.
BenchReport bench_gaussian(const std::vector<int>& sizes, std::uint64_t seed = 7);

/// Timing of the particle utility vs total enumerated sensor count.
BenchReport bench_particle(const std::vector<int>& sizes, std::uint64_t seed = 7);

/// Deterministic float formatting shared by all CSV writers.
std::string fmt(double v);

std::string profile_string(const game::StrategyProfile& p);

void write_trace_csv(const learn::LearningTrace& trace, const std::string& path);

int worker_count_from_env();

}  // namespace sensornet::harness

#endif
