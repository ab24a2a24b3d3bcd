#include "sensornet/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <unordered_map>

namespace sensornet::tracking {

namespace {

double entropy_term(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

std::string key_of(std::span<const int> a, std::span<const int> c) {
  std::vector<int> sa(a.begin(), a.end()), sc(c.begin(), c.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sc.begin(), sc.end());
  std::string key;
  for (int v : sa) key.append(reinterpret_cast<const char*>(&v), sizeof(v));
  key.push_back('|');
  for (int v : sc) key.append(reinterpret_cast<const char*>(&v), sizeof(v));
  return key;
}

}  // namespace

void ParticleSet::validate() const {
  double sum = 0.0;
  for (const Particle& p : particles) {
    if (p.weight < 0.0) throw InvalidInput("ParticleSet: negative weight");
    sum += p.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidInput("ParticleSet: weights must sum to 1");
}

void ParticleSet::normalize() {
  double sum = 0.0;
  for (const Particle& p : particles) sum += p.weight;
  if (sum <= 0.0) throw InvalidInput("ParticleSet: cannot normalize zero weights");
  for (Particle& p : particles) p.weight /= sum;
}

double detection_prob(const DetectionSensor& sensor, const Particle& hypothesis) {
  double p = 0.0;
  if (!hypothesis.targets.empty()) {
    double r_min = std::numeric_limits<double>::infinity();
    for (const auto& t : hypothesis.targets)
      r_min = std::min(r_min, (t.head<2>() - sensor.position).norm());
    p = sensor.pd0 * std::exp(-r_min / sensor.r0);
  }
  return 1.0 - (1.0 - p) * (1.0 - sensor.pf);
}

Eigen::MatrixXd outcome_likelihoods(std::span<const int> points,
                                    const std::vector<DetectionSensor>& sensors,
                                    const ParticleSet& ps) {
  const int k = static_cast<int>(points.size());
  if (k > kOutcomeGuardBits)
    throw OutcomeSpaceTooLarge("outcome enumeration limited to 2^" +
                               std::to_string(kOutcomeGuardBits));
  const int np = static_cast<int>(ps.particles.size());
  Eigen::MatrixXd table = Eigen::MatrixXd::Ones(1, np);
  for (int bit = 0; bit < k; ++bit) {
    const DetectionSensor& s = sensors.at(points[bit]);
    Eigen::RowVectorXd p(np);
    for (int i = 0; i < np; ++i) p(i) = detection_prob(s, ps.particles[i]);
    Eigen::MatrixXd next(table.rows() * 2, np);
    next.topRows(table.rows()) =
        table.array().rowwise() * (1.0 - p.array());  // bit = 0
    next.bottomRows(table.rows()) = table.array().rowwise() * p.array();
    table.swap(next);
  }
  return table;
}

double mc_entropy(std::span<const int> points,
                  const std::vector<DetectionSensor>& sensors,
                  const ParticleSet& ps) {
  if (points.empty()) return 0.0;
  const Eigen::MatrixXd table = outcome_likelihoods(points, sensors, ps);
  double h = 0.0;
  for (Eigen::Index z = 0; z < table.rows(); ++z) {
    double q = 0.0;
    for (Eigen::Index i = 0; i < table.cols(); ++i)
      q += ps.particles[i].weight * table(z, i);
    h += entropy_term(q);
  }
  return h;
}

double mc_cond_entropy(std::span<const int> points,
                       const std::vector<DetectionSensor>& sensors,
                       const ParticleSet& ps) {
  if (points.empty()) return 0.0;
  const Eigen::MatrixXd table = outcome_likelihoods(points, sensors, ps);
  double h = 0.0;
  for (Eigen::Index i = 0; i < table.cols(); ++i) {
    double hi = 0.0;
    for (Eigen::Index z = 0; z < table.rows(); ++z) hi += entropy_term(table(z, i));
    h += ps.particles[i].weight * hi;
  }
  return h;
}

double particle_utility(std::span<const int> a, std::span<const int> c,
                        const std::vector<DetectionSensor>& sensors,
                        const ParticleSet& ps) {
  // Duplicate points are independent repeated measurements, so the joint
  // set is the concatenation, not a set union.
  std::vector<int> joint(a.begin(), a.end());
  joint.insert(joint.end(), c.begin(), c.end());
  const double mi_joint = mc_entropy(joint, sensors, ps) -
                          mc_cond_entropy(joint, sensors, ps);
  if (c.empty()) return mi_joint;
  const double mi_cond = mc_entropy(c, sensors, ps) -
                         mc_cond_entropy(c, sensors, ps);
  return mi_joint - mi_cond;
}

ParticleSet jmpd_step(const ParticleSet& ps, const MotionModel& motion,
                      const std::vector<DetectionSensor>& sensors,
                      const std::vector<Observation>& observations,
                      std::uint64_t shared_seed) {
  std::mt19937_64 rng(shared_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  ParticleSet out = ps;
  const double sv = motion.accel_sigma * std::sqrt(motion.dt);
  for (Particle& p : out.particles) {
    for (auto& t : p.targets) {
      t(2) += sv * gauss(rng);
      t(3) += sv * gauss(rng);
      t(0) += t(2) * motion.dt;
      t(1) += t(3) * motion.dt;
    }
  }
  if (observations.empty()) return out;

  for (Particle& p : out.particles) {
    double like = 1.0;
    for (const Observation& obs : observations) {
      const double pd = detection_prob(sensors.at(obs.sensor), p);
      like *= obs.detected ? pd : (1.0 - pd);
    }
    p.weight *= like;
  }
  double sum = 0.0;
  for (const Particle& p : out.particles) sum += p.weight;
  if (sum <= 1e-300) {
    std::cerr << "jmpd_step: weight degeneracy, resetting to uniform\n";
    for (Particle& p : out.particles)
      p.weight = 1.0 / static_cast<double>(out.particles.size());
  } else {
    for (Particle& p : out.particles) p.weight /= sum;
  }

  double ess_inv = 0.0;
  for (const Particle& p : out.particles) ess_inv += p.weight * p.weight;
  const double ess = 1.0 / ess_inv;
  const auto n = static_cast<double>(out.particles.size());
  if (ess < 0.5 * n) {
    // Systematic resampling from a single uniform draw.
    std::uniform_real_distribution<double> unit(0.0, 1.0 / n);
    const double u0 = unit(rng);
    std::vector<Particle> resampled;
    resampled.reserve(out.particles.size());
    double cum = out.particles[0].weight;
    std::size_t j = 0;
    for (std::size_t k = 0; k < out.particles.size(); ++k) {
      const double u = u0 + static_cast<double>(k) / n;
      while (u > cum && j + 1 < out.particles.size()) cum += out.particles[++j].weight;
      Particle p = out.particles[j];
      p.weight = 1.0 / n;
      resampled.push_back(std::move(p));
    }
    out.particles = std::move(resampled);
  }
  return out;
}

ParticleEngine::ParticleEngine(std::vector<DetectionSensor> sensors,
                               ParticleSet ps)
    : sensors_(std::move(sensors)), ps_(std::move(ps)) {
  ps_.validate();
}

double ParticleEngine::conditional_mi(std::span<const int> a,
                                      std::span<const int> c) const {
  const std::string key = key_of(a, c);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const double v = particle_utility(a, c, sensors_, ps_);
  std::lock_guard<std::mutex> lock(memo_mutex_);
  if (memo_.size() >= (1u << 18)) memo_.clear();
  memo_.emplace(key, v);
  return v;
}

void detection_moments(const std::vector<DetectionSensor>& sensors,
                       const ParticleSet& ps, Eigen::MatrixXd& p0,
                       Eigen::MatrixXd& pt) {
  const int m = static_cast<int>(sensors.size());
  const int np = static_cast<int>(ps.particles.size());
  Eigen::MatrixXd prob(m, np);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < np; ++i)
      prob(k, i) = detection_prob(sensors[k], ps.particles[i]);
  Eigen::VectorXd w(np);
  for (int i = 0; i < np; ++i) w(i) = ps.particles[i].weight;
  const Eigen::VectorXd mean = prob * w;
  p0 = prob * w.asDiagonal() * prob.transpose() - mean * mean.transpose();
  pt = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    double var_within = 0.0;
    for (int i = 0; i < np; ++i)
      var_within += w(i) * prob(k, i) * (1.0 - prob(k, i));
    p0(k, k) = mean(k) * (1.0 - mean(k));  // Bernoulli marginal variance
    pt(k, k) = var_within;
  }
}

TrackingCase build_tracking_case(const TrackingConfig& cfg, std::uint64_t seed) {
  TrackingCase out;
  const int cells = static_cast<int>(cfg.region / cfg.cell);  // 6 by default
  for (int iy = 0; iy < cells; ++iy)
    for (int ix = 0; ix < cells; ++ix) {
      DetectionSensor s;
      s.position = Eigen::Vector2d((ix + 0.5) * cfg.cell, (iy + 0.5) * cfg.cell);
      s.pd0 = cfg.pd0;
      s.r0 = cfg.r0;
      s.pf = cfg.pf;
      out.sensors.push_back(s);
    }
  auto point_index = [cells](int ix, int iy) { return ix + cells * iy; };

  // Agent layout per case topology; agent grid positions feed the comm graph.
  std::vector<std::pair<int, int>> agent_pos;
  int agents_x, agents_y, span_x, span_y;
  if (cfg.case_id == 1) {
    agents_x = 3; agents_y = 2; span_x = 2; span_y = 3;
  } else if (cfg.case_id == 2) {
    agents_x = 6; agents_y = 1; span_x = 1; span_y = 6;
  } else {
    throw InvalidInput("build_tracking_case: unknown case id");
  }
  const int n_agents = agents_x * agents_y;
  out.owner_of.assign(out.sensors.size(), -1);
  std::vector<std::vector<int>> region(n_agents);
  for (int ay = 0; ay < agents_y; ++ay)
    for (int ax = 0; ax < agents_x; ++ax) {
      const int agent = ax + agents_x * ay;
      agent_pos.emplace_back(ax, ay);
      for (int dy = 0; dy < span_y; ++dy)
        for (int dx = 0; dx < span_x; ++dx) {
          const int pt = point_index(ax * span_x + dx, ay * span_y + dy);
          region[agent].push_back(pt);
          out.owner_of[pt] = agent;
        }
    }
  out.comm = neighbor::CommGraph::grid(std::move(agent_pos));

  // Truth and prior.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> upos(0.2 * cfg.region, 0.8 * cfg.region);
  std::normal_distribution<double> uvel(0.0, 5.0);
  for (int t = 0; t < 2; ++t)
    out.truth.emplace_back(upos(rng), upos(rng));

  ParticleSet prior;
  std::uniform_real_distribution<double> broad(0.0, cfg.region);
  for (int i = 0; i < cfg.particle_count; ++i) {
    Particle p;
    p.weight = 1.0 / cfg.particle_count;
    for (int t = 0; t < 2; ++t) {
      Eigen::Vector4d st;
      st << broad(rng), broad(rng), uvel(rng), uvel(rng);
      p.targets.push_back(st);
    }
    prior.particles.push_back(std::move(p));
  }

  // One observation round at the four quarter-center sensors, outcomes drawn
  // from the truth.
  Particle truth_particle;
  truth_particle.weight = 1.0;
  for (const auto& pos : out.truth) {
    Eigen::Vector4d st;
    st << pos.x(), pos.y(), 0.0, 0.0;
    truth_particle.targets.push_back(st);
  }
  const int q = cells / 4;
  const std::vector<int> obs_points = {
      point_index(q, q), point_index(cells - 1 - q, q),
      point_index(q, cells - 1 - q), point_index(cells - 1 - q, cells - 1 - q)};
  std::vector<Observation> observations;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int pt : obs_points) {
    const double pd = detection_prob(out.sensors[pt], truth_particle);
    observations.push_back({pt, unit(rng) < pd ? 1 : 0});
  }
  MotionModel motion;
  out.particles = jmpd_step(prior, motion, out.sensors, observations, seed ^ 0x9e3779b97f4a7c15ULL);
  out.particles.validate();

  // Actions: unordered pairs of points (repeats allowed) from the agent's
  // region.
  out.game.engine = std::make_shared<ParticleEngine>(out.sensors, out.particles);
  out.game.action_sets.resize(n_agents);
  for (int agent = 0; agent < n_agents; ++agent) {
    const auto& pts = region[agent];
    if (cfg.points_per_action == 1) {
      for (int p : pts) out.game.action_sets[agent].push_back({p});
    } else {
      for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a; b < pts.size(); ++b)
          out.game.action_sets[agent].push_back({pts[a], pts[b]});
    }
  }
  out.game.validate();
  return out;
}

void save_particles(const ParticleSet& ps, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("save_particles: cannot open " + path);
  f << "weight count states\n";
  char buf[64];
  for (const Particle& p : ps.particles) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.weight);
    f << buf << ' ' << p.targets.size();
    for (const auto& t : p.targets)
      for (int k = 0; k < 4; ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", t(k));
        f << ' ' << buf;
      }
    f << '\n';
  }
}

}  // namespace sensornet::tracking
