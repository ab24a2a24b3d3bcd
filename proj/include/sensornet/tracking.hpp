#ifndef SENSORNET_TRACKING_HPP
#define SENSORNET_TRACKING_HPP

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "sensornet/game.hpp"
#include "sensornet/neighbor.hpp"

namespace sensornet::tracking {

/// One multi-target hypothesis: weight plus per-target kinematic states
/// [x, y, vx, vy] (meters, meters per second).
struct Particle {
  double weight = 0.0;
  std::vector<Eigen::Vector4d> targets;
};

struct ParticleSet {
  std::vector<Particle> particles;
  void validate() const;  // weights >= 0 and sum to 1 within 1e-12
  void normalize();
};

/// Range-based binary detection sensor, P_d(r) = P_d0 * exp(-r/R_0) on the
/// nearest target, combined with a false-alarm floor.
struct DetectionSensor {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double pd0 = 0.9;
  double r0 = 600.0;
  double pf = 0.05;
};

/// Detection probability of the sensor under one hypothesis. With no
/// targets this is the false-alarm rate alone.
double detection_prob(const DetectionSensor& sensor, const Particle& hypothesis);

inline constexpr int kOutcomeGuardBits = 20;

/// Per-particle likelihood table over all 2^|points| binary outcome vectors.
/// Row = outcome index (bit k is the detection at points[k]), column =
/// particle. Detections are conditionally independent given the hypothesis.
Eigen::MatrixXd outcome_likelihoods(std::span<const int> points,
                                    const std::vector<DetectionSensor>& sensors,
                                    const ParticleSet& ps);

/// H(z_s): exact sum over the enumerated binary outcome space.
double mc_entropy(std::span<const int> points,
                  const std::vector<DetectionSensor>& sensors,
                  const ParticleSet& ps);

/// H(z_s | x_t): weighted average of per-hypothesis outcome entropies.
double mc_cond_entropy(std::span<const int> points,
                       const std::vector<DetectionSensor>& sensors,
                       const ParticleSet& ps);

/// I(x_t ; z_a | z_c) over the joint outcome space, in the chain-rule form
/// [H(z_{a u c}) - H(z_{a u c}|x_t)] - [H(z_c) - H(z_c|x_t)].
double particle_utility(std::span<const int> a, std::span<const int> c,
                        const std::vector<DetectionSensor>& sensors,
                        const ParticleSet& ps);

struct MotionModel {
  double dt = 1.0;
  double accel_sigma = 2.0;  // process noise on velocity, m/s per step
};

struct Observation {
  int sensor = 0;
  int detected = 0;  // 0 or 1
};

/// One JMPD update: near-constant-velocity propagation, detection-likelihood
/// reweighting, systematic resampling when ESS drops below half the particle
/// count. All randomness comes from the shared seed so replicated agents
/// produce identical particle sets.
ParticleSet jmpd_step(const ParticleSet& ps, const MotionModel& motion,
                      const std::vector<DetectionSensor>& sensors,
                      const std::vector<Observation>& observations,
                      std::uint64_t shared_seed);

/// Particle-based utility engine for the game layer; location ids index the
/// sensor list.
class ParticleEngine : public game::InfoEngine {
 public:
  ParticleEngine(std::vector<DetectionSensor> sensors, ParticleSet ps);
  double conditional_mi(std::span<const int> a,
                        std::span<const int> c) const override;
  const std::vector<DetectionSensor>& sensors() const { return sensors_; }
  const ParticleSet& particles() const { return ps_; }

 private:
  std::vector<DetectionSensor> sensors_;
  ParticleSet ps_;
  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<std::string, double> memo_;
};

/// Bernoulli moment matrices for the correlation-based neighbor selection:
/// p0 = mixture covariance of the detection indicators, pt = expected
/// within-hypothesis covariance (diagonal under conditional independence).
void detection_moments(const std::vector<DetectionSensor>& sensors,
                       const ParticleSet& ps, Eigen::MatrixXd& p0,
                       Eigen::MatrixXd& pt);

struct TrackingConfig {
  double region = 2400.0;     // square side, meters
  double cell = 400.0;        // sensing-point cell side
  int case_id = 1;            // 1: 3x2 agents of 2x3 points, 2: 6x1 of 1x6
  int particle_count = 500;
  double pd0 = 0.9;
  double r0 = 600.0;
  double pf = 0.05;
  int points_per_action = 2;  // n_i, points may repeat within an action
};

struct TrackingCase {
  std::vector<DetectionSensor> sensors;  // one per grid cell
  ParticleSet particles;                 // after the scripted JMPD update
  game::SensorGame game;
  neighbor::CommGraph comm;              // agent grid graph
  std::vector<int> owner_of;             // sensing point -> agent
  std::vector<Eigen::Vector2d> truth;    // true target positions
};

/// Scripted scenario: two true targets, particles from a broad prior, one
/// JMPD update on an initial observation, then the selection game.
TrackingCase build_tracking_case(const TrackingConfig& cfg, std::uint64_t seed);

/// Plain-text particle snapshot: weight, target count, flattened states.
void save_particles(const ParticleSet& ps, const std::string& path);

}  // namespace sensornet::tracking

#endif
