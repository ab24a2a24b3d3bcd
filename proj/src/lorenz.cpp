#include "sensornet/lorenz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

namespace sensornet::lorenz {

namespace {

// State access with cyclic longitude and forcing-valued ghost rows in
// latitude.
inline double at(const Eigen::VectorXd& y, const LorenzConfig& cfg, int i, int j) {
  if (j < 0 || j >= cfg.lat) return cfg.forcing;
  i = ((i % cfg.lon) + cfg.lon) % cfg.lon;
  return y[cfg.idx(i, j)];
}

struct CaseLayout {
  std::vector<int> cand_cells;              // grid index per candidate
  std::vector<int> owner;                   // player per candidate
  std::vector<std::pair<int, int>> player_pos;  // relay-chain coordinates
  int n_players = 0;
};

CaseLayout case_layout(const WeatherConfig& cfg) {
  int off_lon, off_lat, cand_lon, cand_lat, block_lon, block_lat;
  switch (cfg.case_id) {
    case 1: off_lon = 0; off_lat = 0; cand_lon = 9; cand_lat = 6;
            block_lon = 3; block_lat = 2; break;
    case 2: off_lon = 3; off_lat = 3; cand_lon = 9; cand_lat = 6;
            block_lon = 3; block_lat = 2; break;
    case 3: off_lon = 1; off_lat = 0; cand_lon = 10; cand_lat = 9;
            block_lon = 2; block_lat = 3; break;
    default: throw InvalidInput("case_layout: unknown case id");
  }
  if (off_lon + cand_lon > cfg.search_lon || off_lat + cand_lat > cfg.search_lat)
    throw InvalidInput("case_layout: candidate block exceeds search region");

  CaseLayout out;
  const int px = cand_lon / block_lon;
  const int py = cand_lat / block_lat;
  out.n_players = px * py;
  // Agents relay messages along a serpentine chain through the block rows,
  // so consecutive chain positions are also physically adjacent blocks.
  for (int by = 0; by < py; ++by)
    for (int bx = 0; bx < px; ++bx) {
      const int along = by % 2 == 0 ? bx : px - 1 - bx;
      out.player_pos.emplace_back(by * px + along, 0);
    }
  for (int by = 0; by < py; ++by)
    for (int bx = 0; bx < px; ++bx) {
      const int player = bx + px * by;
      for (int dj = 0; dj < block_lat; ++dj)
        for (int di = 0; di < block_lon; ++di) {
          const int lon = (cfg.search_lon0 + off_lon + bx * block_lon + di) %
                          cfg.model.lon;
          const int lat = cfg.search_lat0 + off_lat + by * block_lat + dj;
          out.cand_cells.push_back(cfg.model.idx(lon, lat));
          out.owner.push_back(player);
        }
    }
  return out;
}

std::vector<int> verification_cells(const WeatherConfig& cfg) {
  std::vector<int> cells;
  for (int dj = 0; dj < cfg.verif_lat; ++dj)
    for (int di = 0; di < cfg.verif_lon; ++di)
      cells.push_back(cfg.model.idx((cfg.verif_lon0 + di) % cfg.model.lon,
                                    cfg.verif_lat0 + dj));
  return cells;
}

std::vector<int> routine_network(const WeatherConfig& cfg) {
  std::vector<bool> in_search(cfg.model.size(), false);
  for (int dj = 0; dj < cfg.search_lat; ++dj)
    for (int di = 0; di < cfg.search_lon; ++di)
      in_search[cfg.model.idx((cfg.search_lon0 + di) % cfg.model.lon,
                              cfg.search_lat0 + dj)] = true;
  std::vector<int> eligible;
  for (int c = 0; c < cfg.model.size(); ++c)
    if (!in_search[c]) eligible.push_back(c);
  if (static_cast<int>(eligible.size()) < cfg.routine_count)
    throw InvalidInput("routine_network: not enough cells outside search region");
  std::mt19937_64 rng(cfg.routine_seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(cfg.routine_count);
  std::sort(eligible.begin(), eligible.end());  // fixed ascending order
  return eligible;
}

void propagate_members(Ensemble& ens, double time, const WeatherConfig& cfg) {
  const int m = ens.size();
  const int workers = std::clamp(cfg.workers, 1, m);
  auto run = [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k)
      ens.members.col(k) = integrate(ens.members.col(k), time, cfg.model);
  };
  if (workers == 1) {
    run(0, m);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (m + workers - 1) / workers;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back(run, w * chunk, std::min(m, (w + 1) * chunk));
  for (auto& t : pool) t.join();
}

}  // namespace

Eigen::VectorXd lorenz_deriv(const Eigen::VectorXd& y, const LorenzConfig& cfg) {
  Eigen::VectorXd dy(cfg.size());
  for (int j = 0; j < cfg.lat; ++j)
    for (int i = 0; i < cfg.lon; ++i) {
      const double adv_lon =
          (at(y, cfg, i + 1, j) - at(y, cfg, i - 2, j)) * at(y, cfg, i - 1, j);
      const double adv_lat = (2.0 / 3.0) *
          (at(y, cfg, i, j + 1) - at(y, cfg, i, j - 2)) * at(y, cfg, i, j - 1);
      dy[cfg.idx(i, j)] = adv_lon + adv_lat - y[cfg.idx(i, j)] + cfg.forcing;
    }
  return dy;
}

Eigen::VectorXd rk4_step(const Eigen::VectorXd& y, double dt,
                         const LorenzConfig& cfg) {
  if (dt <= 0.0) throw InvalidInput("rk4_step: dt must be positive");
  const Eigen::VectorXd k1 = lorenz_deriv(y, cfg);
  const Eigen::VectorXd k2 = lorenz_deriv(y + 0.5 * dt * k1, cfg);
  const Eigen::VectorXd k3 = lorenz_deriv(y + 0.5 * dt * k2, cfg);
  const Eigen::VectorXd k4 = lorenz_deriv(y + dt * k3, cfg);
  Eigen::VectorXd out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw NonFinite("rk4_step: state diverged");
  return out;
}

Eigen::VectorXd integrate(Eigen::VectorXd y, double time, const LorenzConfig& cfg) {
  const int steps = static_cast<int>(std::lround(time / cfg.dt));
  for (int s = 0; s < steps; ++s) y = rk4_step(y, cfg.dt, cfg);
  return y;
}

void ensrf_assimilate(Ensemble& ens, const std::vector<int>& obs_idx,
                      const Eigen::VectorXd& obs_vals, double r_var) {
  if (r_var <= 0.0) throw InvalidInput("ensrf_assimilate: R must be positive");
  const int m = ens.size();
  if (m < 2) throw InvalidInput("ensrf_assimilate: need at least 2 members");
  Eigen::VectorXd mean = ens.mean();
  Eigen::MatrixXd anom = ens.members.colwise() - mean;
  for (std::size_t o = 0; o < obs_idx.size(); ++o) {
    const int idx = obs_idx[o];
    const Eigen::RowVectorXd hx = anom.row(idx);
    const double s2 = hx.squaredNorm() / (m - 1);
    const double denom = s2 + r_var;
    const Eigen::VectorXd gain = (anom * hx.transpose()) / ((m - 1) * denom);
    mean += gain * (obs_vals[o] - mean[idx]);
    const double alpha = 1.0 / (1.0 + std::sqrt(r_var / denom));
    anom -= alpha * gain * hx;
  }
  ens.members = anom.colwise() + mean;
  if (!ens.members.allFinite())
    throw NonFinite("ensrf_assimilate: ensemble diverged");
}

gauss::JointGaussian build_joint(const WeatherConfig& cfg, std::uint64_t seed) {
  const CaseLayout layout = case_layout(cfg);
  const std::vector<int> verif = verification_cells(cfg);
  const std::vector<int> routine = routine_network(cfg);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const LorenzConfig& model = cfg.model;

  Eigen::VectorXd nature(model.size());
  for (int c = 0; c < model.size(); ++c) nature[c] = model.forcing + unit(rng);
  nature = integrate(std::move(nature), cfg.spinup_time, model);

  Ensemble ens;
  ens.members.resize(model.size(), cfg.ensemble_size);
  for (int k = 0; k < cfg.ensemble_size; ++k)
    for (int c = 0; c < model.size(); ++c)
      ens.members(c, k) = nature[c] + unit(rng);

  const double obs_sigma = std::sqrt(cfg.routine_noise_var);
  for (int cycle = 0; cycle <= cfg.pre_cycles; ++cycle) {
    Eigen::VectorXd obs(routine.size());
    for (std::size_t o = 0; o < routine.size(); ++o)
      obs[o] = nature[routine[o]] + obs_sigma * unit(rng);
    ensrf_assimilate(ens, routine, obs, cfg.routine_noise_var);
    if (cycle < cfg.pre_cycles) {
      nature = integrate(std::move(nature), cfg.assim_interval, model);
      propagate_members(ens, cfg.assim_interval, cfg);
    }
  }

  // Members now sit at t_s; record candidate states, then run each member
  // forward to t_v for the verification states.
  const int nc = static_cast<int>(layout.cand_cells.size());
  const int nv = static_cast<int>(verif.size());
  Eigen::MatrixXd samples(nc + nv, cfg.ensemble_size);
  for (int k = 0; k < cfg.ensemble_size; ++k)
    for (int c = 0; c < nc; ++c) samples(c, k) = ens.members(layout.cand_cells[c], k);
  propagate_members(ens, cfg.t_v - cfg.t_s, cfg);
  for (int k = 0; k < cfg.ensemble_size; ++k)
    for (int v = 0; v < nv; ++v) samples(nc + v, k) = ens.members(verif[v], k);

  const Eigen::VectorXd mean = samples.rowwise().mean();
  samples.colwise() -= mean;
  Eigen::MatrixXd cov =
      (samples * samples.transpose()) / static_cast<double>(cfg.ensemble_size - 1);
  cov.diagonal().array() += 1e-10 * cov.trace() / static_cast<double>(cov.rows());

  std::vector<std::string> labels;
  std::vector<gauss::VarKind> kinds;
  for (int c = 0; c < nc; ++c) {
    labels.push_back("c" + std::to_string(layout.cand_cells[c]));
    kinds.push_back(gauss::VarKind::Sensing);
  }
  for (int v = 0; v < nv; ++v) {
    labels.push_back("v" + std::to_string(verif[v]));
    kinds.push_back(gauss::VarKind::Target);
  }
  return gauss::JointGaussian(std::move(labels), std::move(kinds), std::move(cov));
}

WeatherCase build_weather_case(const WeatherConfig& cfg, std::uint64_t seed) {
  const CaseLayout layout = case_layout(cfg);
  gauss::JointGaussian joint = build_joint(cfg, seed);

  WeatherCase out;
  out.n_players = layout.n_players;
  out.comm = neighbor::CommGraph::grid(layout.player_pos);
  out.game.engine = std::make_shared<game::GaussianEngine>(
      std::move(joint), gauss::NoiseModel(cfg.sensing_noise_var));
  out.game.action_sets.resize(layout.n_players);
  const auto& jg =
      static_cast<const game::GaussianEngine&>(*out.game.engine).joint();
  for (std::size_t c = 0; c < layout.cand_cells.size(); ++c) {
    const int idx = jg.index("c" + std::to_string(layout.cand_cells[c]));
    out.candidate_idx.push_back(idx);
    out.game.action_sets[layout.owner[c]].push_back({idx});
  }
  out.game.validate();
  return out;
}

void save_covariance(const gauss::JointGaussian& jg, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("save_covariance: cannot open " + path);
  const char magic[8] = {'S', 'N', 'C', 'O', 'V', '1', 0, 0};
  const std::int64_t rows = jg.dim(), cols = jg.dim();
  f.write(magic, sizeof(magic));
  f.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  f.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (int r = 0; r < jg.dim(); ++r)
    for (int c = 0; c < jg.dim(); ++c) {
      const double v = jg.cov()(r, c);
      f.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  std::ofstream lf(path + ".labels");
  for (int i = 0; i < jg.dim(); ++i)
    lf << i << ' ' << jg.label(i) << ' '
       << (jg.kind(i) == gauss::VarKind::Sensing ? "sensing" : "target") << '\n';
}

}  // namespace sensornet::lorenz
