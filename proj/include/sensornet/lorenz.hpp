#ifndef SENSORNET_LORENZ_HPP
#define SENSORNET_LORENZ_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sensornet/game.hpp"
#include "sensornet/neighbor.hpp"

namespace sensornet::lorenz {

/// 2-D Lorenz-95 model on a cylinder: cyclic in longitude, constant ghost
/// rows at the forcing value outside the latitude band.
struct LorenzConfig {
  int lon = 36;
  int lat = 9;
  double forcing = 8.0;
  double dt = 0.01;

  int size() const { return lon * lat; }
  int idx(int i, int j) const { return j * lon + i; }  // i: lon, j: lat
};

Eigen::VectorXd lorenz_deriv(const Eigen::VectorXd& y, const LorenzConfig& cfg);

/// Classical RK4 step; throws NonFinite if the state diverges.
Eigen::VectorXd rk4_step(const Eigen::VectorXd& y, double dt,
                         const LorenzConfig& cfg);

Eigen::VectorXd integrate(Eigen::VectorXd y, double time, const LorenzConfig& cfg);

/// Ensemble as columns; sample covariance uses 1/(m-1).
struct Ensemble {
  Eigen::MatrixXd members;  // state dim x m
  int size() const { return static_cast<int>(members.cols()); }
  Eigen::VectorXd mean() const { return members.rowwise().mean(); }
};

/// Serial (one observation at a time) ensemble square-root update: mean via
/// the Kalman gain, perturbations scaled so no perturbed observations are
/// used. Observations are processed in the given (fixed) order.
void ensrf_assimilate(Ensemble& ens, const std::vector<int>& obs_idx,
                      const Eigen::VectorXd& obs_vals, double r_var);

struct WeatherConfig {
  LorenzConfig model;
  int ensemble_size = 1024;
  double spinup_time = 2.0;
  int pre_cycles = 10;          // routine assimilation cycles before t_s
  double assim_interval = 0.05;  // 6 h
  double t_s = 0.05;
  double t_v = 0.55;
  double routine_noise_var = 0.0484;  // 0.22^2
  int routine_count = 93;
  std::uint64_t routine_seed = 42;  // layout fixed across scenario seeds
  double sensing_noise_var = 0.0484;
  // Oceanic candidate block (lon0 wraps) and the verification block east of
  // it at t_v.
  int search_lon0 = 21, search_lat0 = 0, search_lon = 12, search_lat = 9;
  int verif_lon0 = 34, verif_lat0 = 3, verif_lon = 3, verif_lat = 3;
  int case_id = 1;  // Table-style topologies, see build_weather_case
  int workers = 1;  // threads for ensemble member propagation
};

struct WeatherCase {
  game::SensorGame game;           // Gaussian engine over the t_s/t_v joint
  neighbor::CommGraph comm;        // player-block grid graph
  std::vector<int> candidate_idx;  // joint-label index per candidate, in game order
  int n_players = 0;
};

/// Case topologies: 1 and 2 are 9 players with 3x2 blocks carved from a 9x6
/// candidate region at two different offsets; case 3 is 15 players with 2x3
/// blocks from a 10x9 region. One sensing point per action.
WeatherCase build_weather_case(const WeatherConfig& cfg, std::uint64_t seed);

/// Joint Gaussian over candidate measurements at t_s and verification states
/// at t_v, from a seeded nature run, routine-network EnSRF cycling, and
/// member propagation to t_v.
gauss::JointGaussian build_joint(const WeatherConfig& cfg, std::uint64_t seed);

/// Dense binary covariance snapshot (header: magic, rows, cols; row-major
/// doubles) plus a plain-text label index at path + ".labels".
void save_covariance(const gauss::JointGaussian& jg, const std::string& path);

}  // namespace sensornet::lorenz

#endif
