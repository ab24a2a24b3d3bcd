#include "sensornet/gauss_info.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

namespace sensornet::gauss {

namespace {

constexpr double kLog2PiE = 2.837877066409345483560659472811;  // log(2*pi*e)

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, std::span<const int> rows,
                          std::span<const int> cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  return out;
}

void add_noise_diag(Eigen::MatrixXd& block, const JointGaussian& jg,
                    std::span<const int> idx, const NoiseModel* noise) {
  if (!noise) return;
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (jg.kind(idx[k]) == VarKind::Sensing)
      block(k, k) += noise->variance(jg.label(idx[k]));
}

// Cholesky with one jitter retry. Returns false if both attempts fail.
bool try_llt(Eigen::MatrixXd& m, Eigen::LLT<Eigen::MatrixXd>& llt) {
  m = 0.5 * (m + m.transpose().eval());
  llt.compute(m);
  if (llt.info() == Eigen::Success) return true;
  const double jitter = 1e-10 * m.trace() / static_cast<double>(m.rows());
  m.diagonal().array() += jitter;
  llt.compute(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

NoiseModel::NoiseModel(double default_variance) : default_variance_(default_variance) {
  if (default_variance <= 0.0)
    throw InvalidInput("NoiseModel: default variance must be positive");
}

void NoiseModel::set(const std::string& label, double variance) {
  if (variance <= 0.0) throw InvalidInput("NoiseModel: variance must be positive");
  overrides_[label] = variance;
}

double NoiseModel::variance(const std::string& label) const {
  auto it = overrides_.find(label);
  if (it != overrides_.end()) return it->second;
  if (default_variance_ <= 0.0)
    throw InvalidInput("NoiseModel: no variance for label " + label);
  return default_variance_;
}

JointGaussian::JointGaussian(std::vector<std::string> labels,
                             std::vector<VarKind> kinds, Eigen::MatrixXd cov)
    : labels_(std::move(labels)), kinds_(std::move(kinds)), cov_(std::move(cov)) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (kinds_.size() != labels_.size() || cov_.rows() != n || cov_.cols() != n)
    throw InvalidInput("JointGaussian: inconsistent dimensions");
  for (int i = 0; i < n; ++i) {
    if (!index_.emplace(labels_[i], i).second)
      throw InvalidInput("JointGaussian: duplicate label " + labels_[i]);
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if (((cov_ - cov_.transpose().eval()).cwiseAbs().maxCoeff()) > 1e-12 * scale)
    throw InvalidInput("JointGaussian: covariance not symmetric");
  cov_ = 0.5 * (cov_ + cov_.transpose().eval());
  // PSD check with the module's pivot tolerance.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov_);
  const double floor = -1e-10 * cov_.trace();
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < floor)
    throw NotPositiveDefinite("JointGaussian: covariance not PSD");
}

int JointGaussian::index(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw InvalidInput("JointGaussian: unknown label " + label);
  return it->second;
}

std::vector<int> JointGaussian::indices_of_kind(VarKind k) const {
  std::vector<int> out;
  for (int i = 0; i < dim(); ++i)
    if (kinds_[i] == k) out.push_back(i);
  return out;
}

double log_det(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::MatrixXd work = m;
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!try_llt(work, llt))
    throw NotPositiveDefinite("log_det: matrix not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd condition(const JointGaussian& jg, std::span<const int> keep,
                          std::span<const int> given, const NoiseModel* noise) {
  Eigen::MatrixXd paa = submatrix(jg.cov(), keep, keep);
  if (given.empty()) return paa;
  Eigen::MatrixXd pcc = submatrix(jg.cov(), given, given);
  add_noise_diag(pcc, jg, given, noise);
  Eigen::MatrixXd pac = submatrix(jg.cov(), keep, given);
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!try_llt(pcc, llt))
    throw SingularConditioningBlock("condition: conditioning block not PD");
  Eigen::MatrixXd out = paa - pac * llt.solve(pac.transpose());
  return 0.5 * (out + out.transpose().eval());
}

double entropy(const JointGaussian& jg, std::span<const int> a,
               const NoiseModel* noise) {
  if (a.empty()) throw InvalidInput("entropy: empty variable set");
  Eigen::MatrixXd block = submatrix(jg.cov(), a, a);
  add_noise_diag(block, jg, a, noise);
  return 0.5 * static_cast<double>(a.size()) * kLog2PiE + 0.5 * log_det(block);
}

double mutual_info(const JointGaussian& jg, std::span<const int> a,
                   std::span<const int> targets, const NoiseModel& noise) {
  if (a.empty() || targets.empty()) return 0.0;
  Eigen::MatrixXd prior = submatrix(jg.cov(), a, a);
  add_noise_diag(prior, jg, a, &noise);
  Eigen::MatrixXd post = condition(jg, a, targets, &noise);
  add_noise_diag(post, jg, a, &noise);
  return 0.5 * (log_det(prior) - log_det(post));
}

double cond_mutual_info(const JointGaussian& jg, std::span<const int> a,
                        std::span<const int> targets, std::span<const int> c,
                        const NoiseModel& noise) {
  if (c.empty()) return mutual_info(jg, a, targets, noise);
  if (a.empty() || targets.empty()) return 0.0;
  Eigen::MatrixXd prior = condition(jg, a, c, &noise);
  add_noise_diag(prior, jg, a, &noise);
  std::vector<int> ct(c.begin(), c.end());
  ct.insert(ct.end(), targets.begin(), targets.end());
  Eigen::MatrixXd post = condition(jg, a, ct, &noise);
  add_noise_diag(post, jg, a, &noise);
  return 0.5 * (log_det(prior) - log_det(post));
}

}  // namespace sensornet::gauss
