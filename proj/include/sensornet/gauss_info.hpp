#ifndef SENSORNET_GAUSS_INFO_HPP
#define SENSORNET_GAUSS_INFO_HPP

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "sensornet/errors.hpp"

namespace sensornet::gauss {

enum class VarKind { Sensing, Target };

/// Additive measurement noise variances, keyed per sensing label with a
/// shared default. Targets never carry noise.
class NoiseModel {
 public:
  NoiseModel() = default;
  explicit NoiseModel(double default_variance);

  void set(const std::string& label, double variance);
  double variance(const std::string& label) const;

 private:
  double default_variance_ = 0.0;
  std::unordered_map<std::string, double> overrides_;
};

/// Labeled joint Gaussian covariance over sensing-state and target variables.
/// The covariance is symmetrized on construction and checked for positive
/// semidefiniteness (pivots may dip to -1e-10 * trace before rejection).
class JointGaussian {
 public:
  JointGaussian(std::vector<std::string> labels, std::vector<VarKind> kinds,
                Eigen::MatrixXd cov);

  int dim() const { return static_cast<int>(labels_.size()); }
  int index(const std::string& label) const;
  const std::string& label(int idx) const { return labels_[idx]; }
  const std::vector<std::string>& labels() const { return labels_; }
  VarKind kind(int idx) const { return kinds_[idx]; }
  const Eigen::MatrixXd& cov() const { return cov_; }

  std::vector<int> indices_of_kind(VarKind k) const;

 private:
  std::vector<std::string> labels_;
  std::vector<VarKind> kinds_;
  Eigen::MatrixXd cov_;
  std::unordered_map<std::string, int> index_;
};

/// log|M| via Cholesky. Symmetrizes first; if the factorization fails, adds
/// jitter 1e-10*trace/n to the diagonal once and retries, then throws
/// NotPositiveDefinite.
double log_det(const Eigen::MatrixXd& m);

/// Conditional covariance P_AA - P_AC P_CC^{-1} P_CA over index sets into jg.
/// With noise given, R is added to the diagonal of sensing variables in the
/// conditioning block (P(z_C) = P(x_C) + R_C); the A block is returned
/// without noise. C empty returns the A block unchanged.
Eigen::MatrixXd condition(const JointGaussian& jg, std::span<const int> keep,
                          std::span<const int> given,
                          const NoiseModel* noise = nullptr);

/// Differential entropy (nats) of the variables A; sensing variables get
/// noise added when a NoiseModel is supplied.
double entropy(const JointGaussian& jg, std::span<const int> a,
               const NoiseModel* noise = nullptr);

/// I(x_T ; z_A) in the backward form
/// (1/2)log|P(x_A)+R_A| - (1/2)log|P(x_A|x_T)+R_A|. Zero when A or T empty.
double mutual_info(const JointGaussian& jg, std::span<const int> a,
                   std::span<const int> targets, const NoiseModel& noise);

/// I(x_T ; z_A | z_C) = H(z_A|z_C) - H(z_A|x_T,z_C). C = empty reduces to
/// mutual_info.
double cond_mutual_info(const JointGaussian& jg, std::span<const int> a,
                        std::span<const int> targets, std::span<const int> c,
                        const NoiseModel& noise);

}  // namespace sensornet::gauss

#endif
