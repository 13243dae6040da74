#include "psmc/combiner.hpp"

#include <algorithm>
#include <cmath>

namespace psmc {

std::string to_string(CombineMethod method) {
  switch (method) {
    case CombineMethod::AR: return "AR";
    case CombineMethod::ARNR: return "AR+NR";
    case CombineMethod::CMC: return "CMC";
  }
  return "?";
}

CombineMethod parse_method(const std::string& text) {
  if (text == "AR") return CombineMethod::AR;
  if (text == "AR+NR") return CombineMethod::ARNR;
  if (text == "CMC") return CombineMethod::CMC;
  throw ConfigurationError("unknown combiner '" + text + "' (expected AR, AR+NR or CMC)");
}

namespace {

void check_chains(const SubposteriorResult& sub) {
  if (sub.chains.empty()) throw PreconditionError("no subposterior chains to combine");
  const Eigen::Index d = sub.dim();
  for (std::size_t i = 0; i < sub.chains.size(); ++i) {
    if (sub.chains[i].dim() != d || sub.shard_means[i].size() != d) {
      throw DimensionMismatch("chain " + std::to_string(i) + " has dimension " +
                              std::to_string(sub.chains[i].dim()) + ", expected " +
                              std::to_string(d));
    }
  }
}

}  // namespace

Vector common_center(const SubposteriorResult& sub) {
  check_chains(sub);
  Vector center = Vector::Zero(sub.dim());
  for (const auto& m : sub.shard_means) center += m;
  return center / static_cast<double>(sub.K());
}

CombinedSample recenter(const SubposteriorResult& sub, const Vector& center, CombineMethod tag) {
  check_chains(sub);
  if (center.size() != sub.dim()) throw DimensionMismatch("center has wrong dimension");
  Eigen::Index total = 0;
  for (const auto& c : sub.chains) total += c.size();

  CombinedSample out;
  out.method = tag;
  out.center = center;
  out.draws.resize(total, sub.dim());
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < sub.chains.size(); ++i) {
    const auto& chain = sub.chains[i];
    const Eigen::RowVectorXd shift = (center - sub.shard_means[i]).transpose();
    out.chain_offsets.push_back(offset);
    out.draws.middleRows(offset, chain.size()) = chain.draws.rowwise() + shift;
    offset += chain.size();
  }
  return out;
}

CombinedSample combine_ar(const SubposteriorResult& sub) {
  return recenter(sub, common_center(sub), CombineMethod::AR);
}

CombinedSample combine_cmc(const SubposteriorResult& sub) {
  check_chains(sub);
  const Eigen::Index d = sub.dim();
  Eigen::Index T = sub.chains.front().size();
  for (const auto& c : sub.chains) T = std::min(T, c.size());

  CombinedSample out;
  out.method = CombineMethod::CMC;

  std::vector<Matrix> weights;
  bool singular = false;
  for (const auto& cov : sub.shard_covs) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxHessianCondition || !std::isfinite(hi)) {
      singular = true;
      break;
    }
    weights.push_back(eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                      eig.eigenvectors().transpose());
  }
  if (singular) {
    weights.assign(sub.chains.size(), Matrix::Identity(d, d));
    out.warnings.push_back("CMC: singular shard covariance, identity weights used");
  }
  for (const auto& c : sub.chains) {
    if (c.size() != T) {
      out.warnings.push_back("CMC: chains trimmed to " + std::to_string(T) + " draws");
      break;
    }
  }

  Matrix weight_sum = Matrix::Zero(d, d);
  for (const auto& w : weights) weight_sum += w;
  const Eigen::LDLT<Matrix> total(weight_sum);

  // rows of sum_i theta_i^t W_i (W_i symmetric)
  Matrix acc = Matrix::Zero(T, d);
  for (std::size_t i = 0; i < sub.chains.size(); ++i) {
    acc.noalias() += sub.chains[i].draws.topRows(T) * weights[i];
  }
  out.draws = total.solve(acc.transpose()).transpose();
  out.center = out.draws.colwise().mean().transpose();
  out.chain_offsets.push_back(0);
  return out;
}

double gaussian_kl(const Vector& mu1, const Vector& mu2, const Matrix& sigma) {
  if (mu1.size() != mu2.size() || sigma.rows() != mu1.size() || sigma.cols() != mu1.size()) {
    throw DimensionMismatch("gaussian_kl: inconsistent dimensions");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw NotPositiveDefinite("gaussian_kl: covariance is not symmetric");
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("gaussian_kl: covariance is not positive definite");
  }
  const Vector diff = mu1 - mu2;
  // negating diff negates w exactly, so the result is symmetric bit for bit
  const Vector w = llt.matrixL().solve(diff);
  return 0.5 * w.squaredNorm();
}

double tv_bound_from_kl(double kl) {
  if (kl < 0.0 || std::isnan(kl)) throw NegativeKL("tv_bound_from_kl: KL must be >= 0");
  return 2.0 * std::sqrt(kl);
}

}  // namespace psmc
