#include "sensornet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace sensornet::harness {

namespace {

using nlohmann::json;

const std::vector<std::string> kAllStrategies = {
    "local-greedy",     "sequential-greedy", "jsfp-full",
    "jsfp-full-inertia", "jsfp-approx-khop", "jsfp-approx-corr",
    "oracle"};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

learn::LearningTrace single_profile_trace(const game::SensorGame& g,
                                          const game::StrategyProfile& p) {
  learn::LearningTrace t;
  t.profiles.push_back(p);
  t.objectives.push_back(game::global_objective(g, p));
  t.converged = true;
  return t;
}

}  // namespace

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string profile_string(const game::StrategyProfile& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ";" : "") << p[i];
  return os.str();
}

void write_trace_csv(const learn::LearningTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("write_trace_csv: cannot open " + path);
  f << "stage,objective,profile\n";
  for (int s = 0; s < trace.stages(); ++s)
    f << s << ',' << fmt(trace.objectives[s]) << ','
      << profile_string(trace.profiles[s]) << '\n';
}

int worker_count_from_env() {
  if (const char* env = std::getenv("SENSORNET_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("manifest: cannot open " + path);
  json j = json::parse(f);
  RunManifest m;
  m.scenario = j.value("scenario", m.scenario);
  m.case_id = j.value("case", m.case_id);
  m.seed = j.value("seed", m.seed);
  if (j.contains("strategies"))
    m.strategies = j["strategies"].get<std::vector<std::string>>();
  m.inertia = j.value("inertia", m.inertia);
  m.inertia_reps = j.value("inertia_reps", m.inertia_reps);
  m.khop = j.value("khop", m.khop);
  m.corr_budget = j.value("corr_budget", m.corr_budget);
  m.max_stages = j.value("max_stages", m.max_stages);
  m.out_dir = j.value("out_dir", m.out_dir);
  m.version_tag = j.value("version", m.version_tag);
  if (j.contains("weather")) {
    const json& w = j["weather"];
    m.weather.ensemble_size = w.value("ensemble_size", m.weather.ensemble_size);
    m.weather.spinup_time = w.value("spinup_time", m.weather.spinup_time);
    m.weather.pre_cycles = w.value("pre_cycles", m.weather.pre_cycles);
    m.weather.routine_noise_var =
        w.value("routine_noise_var", m.weather.routine_noise_var);
    m.weather.sensing_noise_var =
        w.value("sensing_noise_var", m.weather.sensing_noise_var);
    m.weather.routine_count = w.value("routine_count", m.weather.routine_count);
    m.weather.routine_seed = w.value("routine_seed", m.weather.routine_seed);
    m.weather.model.forcing = w.value("forcing", m.weather.model.forcing);
    m.weather.model.dt = w.value("dt", m.weather.model.dt);
  }
  if (j.contains("tracking")) {
    const json& t = j["tracking"];
    m.tracking.particle_count = t.value("particle_count", m.tracking.particle_count);
    m.tracking.pd0 = t.value("pd0", m.tracking.pd0);
    m.tracking.r0 = t.value("r0", m.tracking.r0);
    m.tracking.pf = t.value("pf", m.tracking.pf);
  }
  return m;
}

void RunManifest::save(const std::string& path) const {
  json j;
  j["scenario"] = scenario;
  j["case"] = case_id;
  j["seed"] = seed;
  j["strategies"] = strategies.empty() ? kAllStrategies : strategies;
  j["inertia"] = inertia;
  j["inertia_reps"] = inertia_reps;
  j["khop"] = khop;
  j["corr_budget"] = corr_budget;
  j["max_stages"] = max_stages;
  j["out_dir"] = out_dir;
  j["version"] = version_tag;
  j["weather"] = {{"ensemble_size", weather.ensemble_size},
                  {"spinup_time", weather.spinup_time},
                  {"pre_cycles", weather.pre_cycles},
                  {"routine_noise_var", weather.routine_noise_var},
                  {"sensing_noise_var", weather.sensing_noise_var},
                  {"routine_count", weather.routine_count},
                  {"routine_seed", weather.routine_seed},
                  {"forcing", weather.model.forcing},
                  {"dt", weather.model.dt}};
  j["tracking"] = {{"particle_count", tracking.particle_count},
                   {"pd0", tracking.pd0},
                   {"r0", tracking.r0},
                   {"pf", tracking.pf}};
  std::ofstream f(path);
  if (!f) throw InvalidInput("manifest: cannot write " + path);
  f << j.dump(2) << '\n';
}

OracleResult exhaustive_oracle(const game::SensorGame& g, std::uint64_t guard) {
  OracleResult best;
  bool first = true;
  game::for_each_profile(g, guard, [&](const game::StrategyProfile& p) {
    const double v = game::global_objective(g, p);
    if (first || v > best.value) {
      best.profile = p;
      best.value = v;
      first = false;
    }
  });
  return best;
}

CaseInstance build_case(const RunManifest& m) {
  CaseInstance inst;
  if (m.scenario == "weather") {
    lorenz::WeatherConfig cfg = m.weather;
    cfg.case_id = m.case_id;
    cfg.workers = worker_count_from_env();
    lorenz::WeatherCase wc = lorenz::build_weather_case(cfg, m.seed);
    inst.game = std::move(wc.game);
    inst.khop_map = neighbor::geometry_neighbors(wc.comm, m.khop);
    // Default budget: half of N-1, rounded up (locations == players here).
    const int budget =
        m.corr_budget > 0 ? m.corr_budget : std::max(1, wc.n_players / 2);
    const auto& engine =
        static_cast<const game::GaussianEngine&>(*inst.game.engine);
    inst.corr_map =
        neighbor::correlation_neighbors_gaussian(inst.game, engine, budget);
  } else if (m.scenario == "tracking") {
    tracking::TrackingConfig cfg = m.tracking;
    cfg.case_id = m.case_id;
    tracking::TrackingCase tc = tracking::build_tracking_case(cfg, m.seed);
    inst.game = std::move(tc.game);
    inst.khop_map = neighbor::geometry_neighbors(tc.comm, m.khop);
    const int n_players = static_cast<int>(inst.game.action_sets.size());
    // Budget mirrors the weather case's "half" rule, counted in locations.
    const int budget =
        m.corr_budget > 0 ? m.corr_budget : std::max(1, n_players / 2);
    Eigen::MatrixXd p0, pt;
    tracking::detection_moments(tc.sensors, tc.particles, p0, pt);
    inst.corr_map = neighbor::correlation_neighbors_from_moments(
        p0, pt, tc.owner_of, n_players, budget);
  } else {
    throw InvalidInput("build_case: unknown scenario " + m.scenario);
  }
  inst.khop_map.validate(inst.game.num_players());
  inst.corr_map.validate(inst.game.num_players());
  return inst;
}

ComparisonTable run_case(const RunManifest& m) {
  namespace fs = std::filesystem;
  const CaseInstance inst = build_case(m);
  const game::SensorGame& g = inst.game;

  fs::path dir = fs::path(m.out_dir) / (m.scenario + "_case" +
                                        std::to_string(m.case_id) + "_seed" +
                                        std::to_string(m.seed));
  fs::create_directories(dir);

  ComparisonTable table;
  table.scenario = m.scenario;
  table.case_id = m.case_id;
  table.seed = m.seed;

  std::vector<int> order(g.num_players());
  std::iota(order.begin(), order.end(), 0);

  const std::vector<std::string>& wanted =
      m.strategies.empty() ? kAllStrategies : m.strategies;

  for (const std::string& name : wanted) {
    ComparisonRow row;
    row.strategy = name;
    const double t0 = now_seconds();
    const fs::path trace_path = dir / (name + ".csv");

    auto jsfp_single = [&](learn::UtilityMode mode, const game::NeighborMap* nm,
                           double alpha, std::uint64_t seed) {
      learn::JsfpOptions opt;
      opt.mode = mode;
      opt.nm = nm;
      opt.inertia = alpha;
      opt.max_stages = m.max_stages;
      opt.seed = seed;
      return learn::jsfp(g, opt);
    };
    auto jsfp_averaged = [&](learn::UtilityMode mode,
                             const game::NeighborMap* nm) {
      std::ofstream f(trace_path);
      f << "rep,objective,stages\n";
      double sum_obj = 0.0, sum_stages = 0.0;
      for (int rep = 0; rep < m.inertia_reps; ++rep) {
        const auto trace =
            jsfp_single(mode, nm, m.inertia, m.seed * 1000003ULL + rep);
        write_trace_csv(trace, (dir / (name + "_rep" + std::to_string(rep) +
                                       ".csv")).string());
        f << rep << ',' << fmt(trace.final_objective()) << ','
          << trace.stages() << '\n';
        sum_obj += trace.final_objective();
        sum_stages += trace.stages();
      }
      row.objective = sum_obj / m.inertia_reps;
      row.stages = sum_stages / m.inertia_reps;
      f << "mean," << fmt(row.objective) << ',' << fmt(row.stages) << '\n';
    };

    if (name == "local-greedy") {
      const auto p = learn::local_greedy(g);
      const auto trace = single_profile_trace(g, p);
      write_trace_csv(trace, trace_path.string());
      row.objective = trace.final_objective();
    } else if (name == "sequential-greedy") {
      const auto p = learn::sequential_greedy(g, order);
      const auto trace = single_profile_trace(g, p);
      write_trace_csv(trace, trace_path.string());
      row.objective = trace.final_objective();
    } else if (name == "oracle") {
      try {
        const auto res = exhaustive_oracle(g);
        const auto trace = single_profile_trace(g, res.profile);
        write_trace_csv(trace, trace_path.string());
        row.objective = res.value;
      } catch (const TooLargeToEnumerate&) {
        row.objective = std::nan("");
        std::ofstream f(trace_path);
        f << "stage,objective,profile\n0,nan,too-large\n";
      }
    } else if (name == "jsfp-full") {
      const auto trace = jsfp_single(learn::UtilityMode::Full, nullptr, 1.0, 0);
      write_trace_csv(trace, trace_path.string());
      row.objective = trace.final_objective();
      row.stages = trace.stages();
    } else if (name == "jsfp-full-inertia") {
      jsfp_averaged(learn::UtilityMode::Full, nullptr);
    } else if (name == "jsfp-approx-khop") {
      jsfp_averaged(learn::UtilityMode::Approx, &inst.khop_map);
    } else if (name == "jsfp-approx-corr") {
      jsfp_averaged(learn::UtilityMode::Approx, &inst.corr_map);
    } else {
      throw InvalidInput("run_case: unknown strategy " + name);
    }
    row.wall_seconds = now_seconds() - t0;
    row.trace_file = trace_path.string();
    table.rows.push_back(std::move(row));
  }

  // Deterministic table outputs; wall times go to a sidecar only.
  {
    std::ofstream f(dir / "table.csv");
    f << "strategy,objective,stages,trace\n";
    for (const auto& r : table.rows)
      f << r.strategy << ',' << fmt(r.objective) << ',' << fmt(r.stages) << ','
        << fs::path(r.trace_file).filename().string() << '\n';
  }
  {
    std::ofstream f(dir / "table.txt");
    f << m.scenario << " case " << m.case_id << " seed " << m.seed << '\n';
    for (const auto& r : table.rows) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-20s %12s %8s\n", r.strategy.c_str(),
                    fmt(r.objective).c_str(), fmt(r.stages).c_str());
      f << line;
    }
  }
  {
    std::ofstream f(dir / "timings.csv");
    f << "strategy,wall_seconds\n";
    for (const auto& r : table.rows)
      f << r.strategy << ',' << fmt(r.wall_seconds) << '\n';
  }
  RunManifest copy = m;
  copy.save((dir / "manifest.json").string());
  return table;
}

BenchReport bench_gaussian(const std::vector<int>& sizes, std::uint64_t seed) {
  BenchReport report;
  if (sizes.empty()) return report;
  const int max_size = *std::max_element(sizes.begin(), sizes.end());
  const int dim = max_size + 4;  // plus a small target set

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd factor(dim, dim + 8);
  for (int r = 0; r < factor.rows(); ++r)
    for (int c = 0; c < factor.cols(); ++c) factor(r, c) = unit(rng);
  Eigen::MatrixXd cov = factor * factor.transpose() / factor.cols();

  std::vector<std::string> labels(dim);
  std::vector<gauss::VarKind> kinds(dim, gauss::VarKind::Sensing);
  for (int i = 0; i < dim; ++i) labels[i] = "s" + std::to_string(i);
  for (int i = max_size; i < dim; ++i) kinds[i] = gauss::VarKind::Target;
  gauss::JointGaussian jg(labels, kinds, cov);
  gauss::NoiseModel noise(0.1);
  std::vector<int> targets;
  for (int i = max_size; i < dim; ++i) targets.push_back(i);

  for (int size : sizes) {
    std::vector<int> cond(size - 1), a{size - 1};
    std::iota(cond.begin(), cond.end(), 0);
    std::vector<double> times;
    for (int rep = 0; rep < 7; ++rep) {
      const double t0 = now_seconds();
      volatile double v = gauss::cond_mutual_info(jg, a, targets, cond, noise);
      (void)v;
      times.push_back(now_seconds() - t0);
    }
    std::sort(times.begin(), times.end());
    report.points.push_back({size, times[times.size() / 2]});
  }
  if (report.points.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : report.points) {
      const double x = std::log(p.size), y = std::log(p.median_seconds);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double n = static_cast<double>(report.points.size());
    report.log_log_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return report;
}

BenchReport bench_particle(const std::vector<int>& sizes, std::uint64_t seed) {
  BenchReport report;
  if (sizes.empty()) return report;
  tracking::TrackingConfig cfg;
  cfg.particle_count = 200;
  tracking::TrackingCase tc = tracking::build_tracking_case(cfg, seed);

  const int max_size = *std::max_element(sizes.begin(), sizes.end());
  if (max_size > static_cast<int>(tc.sensors.size()))
    throw InvalidInput("bench_particle: size exceeds sensor count");

  for (int size : sizes) {
    std::vector<int> pts(size);
    std::iota(pts.begin(), pts.end(), 0);
    const std::vector<int> a(pts.begin(), pts.begin() + 2);
    const std::vector<int> c(pts.begin() + 2, pts.end());
    std::vector<double> times;
    for (int rep = 0; rep < 5; ++rep) {
      const double t0 = now_seconds();
      volatile double v = tracking::particle_utility(a, c, tc.sensors, tc.particles);
      (void)v;
      times.push_back(now_seconds() - t0);
    }
    std::sort(times.begin(), times.end());
    report.points.push_back({size, times[times.size() / 2]});
  }
  std::vector<double> ratios;
  for (std::size_t i = 1; i < report.points.size(); ++i)
    ratios.push_back(report.points[i].median_seconds /
                     report.points[i - 1].median_seconds);
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    report.median_step_ratio = ratios[ratios.size() / 2];
  }
  return report;
}

}  // namespace sensornet::harness
