#include "vhem/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>

#include "vhem/errors.hpp"
#include "vhem/logmath.hpp"

namespace vhem {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_same_dim(const Gaussian& a, const Gaussian& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream msg;
    msg << "gaussian dimension mismatch: " << a.dim() << " vs " << b.dim();
    throw DimensionMismatchError(msg.str());
  }
}

Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw InvalidModelError("covariance is not positive definite");
  }
  return llt;
}

void require_positive_diagonal(const Eigen::MatrixXd& cov) {
  for (Eigen::Index k = 0; k < cov.rows(); ++k) {
    if (!(cov(k, k) > 0.0) || !std::isfinite(cov(k, k))) {
      throw InvalidModelError("diagonal covariance has a non-positive variance");
    }
  }
}

}  // namespace

const char* to_string(CovarianceType type) {
  return type == CovarianceType::Diagonal ? "diag" : "full";
}

CovarianceType covariance_type_from_string(const std::string& name) {
  if (name == "diag" || name == "diagonal") return CovarianceType::Diagonal;
  if (name == "full") return CovarianceType::Full;
  throw ValidationError("unknown covariance type '" + name + "' (expected diag or full)");
}

Gaussian::Gaussian(Eigen::VectorXd mean_in, Eigen::MatrixXd covariance_in, CovarianceType type_in)
    : mean(std::move(mean_in)), covariance(std::move(covariance_in)), type(type_in) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw DimensionMismatchError("covariance shape does not match mean dimension");
  }
}

Gaussian Gaussian::standard(int dim, CovarianceType type) {
  return Gaussian(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim), type);
}

Gaussian Gaussian::diagonal(Eigen::VectorXd mean, const Eigen::VectorXd& variances) {
  Eigen::MatrixXd cov = variances.asDiagonal();
  return Gaussian(std::move(mean), std::move(cov), CovarianceType::Diagonal);
}

void Gaussian::validate(double cov_floor) const {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw DimensionMismatchError("covariance shape does not match mean dimension");
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw InvalidModelError("gaussian has non-finite parameters");
  }
  for (Eigen::Index k = 0; k < covariance.rows(); ++k) {
    if (covariance(k, k) < cov_floor) {
      std::ostringstream msg;
      msg << "covariance diagonal entry " << k << " = " << covariance(k, k)
          << " is below the floor " << cov_floor;
      throw InvalidModelError(msg.str());
    }
  }
  if (type == CovarianceType::Diagonal) {
    require_positive_diagonal(covariance);
    return;
  }
  const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, covariance.cwiseAbs().maxCoeff())) {
    throw InvalidModelError("covariance is not symmetric");
  }
  checked_cholesky(covariance);
}

double Gaussian::log_density(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  return GaussianDensity(*this).log_density(y);
}

GaussianDensity::GaussianDensity(const Gaussian& g) : mean_(g.mean), type_(g.type) {
  const int d = g.dim();
  if (type_ == CovarianceType::Diagonal) {
    require_positive_diagonal(g.covariance);
    inv_var_ = g.covariance.diagonal().cwiseInverse();
    log_det_ = g.covariance.diagonal().array().log().sum();
  } else {
    auto llt = checked_cholesky(g.covariance);
    chol_lower_ = llt.matrixL();
    log_det_ = 2.0 * chol_lower_.diagonal().array().log().sum();
  }
  log_norm_ = -0.5 * (d * kLog2Pi + log_det_);
}

double GaussianDensity::log_density(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (y.size() != mean_.size()) {
    throw DimensionMismatchError("observation dimension does not match gaussian");
  }
  double quad = 0.0;
  if (type_ == CovarianceType::Diagonal) {
    quad = ((y - mean_).array().square() * inv_var_.array()).sum();
  } else {
    Eigen::VectorXd w = chol_lower_.triangularView<Eigen::Lower>().solve(y - mean_);
    quad = w.squaredNorm();
  }
  return log_norm_ - 0.5 * quad;
}

void GaussianMixture::validate(double cov_floor) const {
  if (components.empty()) throw InvalidModelError("gaussian mixture has no components");
  if (weights.size() != static_cast<Eigen::Index>(components.size())) {
    throw InvalidModelError("gaussian mixture weight count does not match component count");
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw InvalidModelError("gaussian mixture has negative weights");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "gaussian mixture weights sum to " << weights.sum();
    throw InvalidModelError(msg.str());
  }
  const int d = components.front().dim();
  for (const auto& c : components) {
    if (c.dim() != d) throw DimensionMismatchError("gaussian mixture components differ in dimension");
    c.validate(cov_floor);
  }
}

double GaussianMixture::log_density(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  Eigen::VectorXd terms(size());
  for (int m = 0; m < size(); ++m) {
    terms[m] = safe_log(weights[m]) + components[m].log_density(y);
  }
  return log_sum_exp(terms);
}

double gauss_expected_loglik(const Gaussian& base, const Gaussian& reduced) {
  require_same_dim(base, reduced);
  const int d = base.dim();
  const Eigen::VectorXd diff = reduced.mean - base.mean;
  double log_det = 0.0;
  double trace = 0.0;
  double quad = 0.0;
  if (reduced.type == CovarianceType::Diagonal) {
    require_positive_diagonal(reduced.covariance);
    const Eigen::VectorXd var = reduced.covariance.diagonal();
    log_det = var.array().log().sum();
    trace = (base.covariance.diagonal().array() / var.array()).sum();
    quad = (diff.array().square() / var.array()).sum();
  } else {
    auto llt = checked_cholesky(reduced.covariance);
    const Eigen::MatrixXd lower = llt.matrixL();
    log_det = 2.0 * lower.diagonal().array().log().sum();
    trace = llt.solve(base.covariance).trace();
    quad = diff.dot(llt.solve(diff));
  }
  return -0.5 * (d * kLog2Pi + log_det + trace + quad);
}

Eigen::MatrixXd gauss_expected_loglik_matrix(const GaussianMixture& base,
                                             const GaussianMixture& reduced) {
  if (base.dim() != reduced.dim()) {
    throw DimensionMismatchError("gaussian mixtures differ in dimension");
  }
  Eigen::MatrixXd out(base.size(), reduced.size());
  for (int m = 0; m < base.size(); ++m) {
    for (int l = 0; l < reduced.size(); ++l) {
      out(m, l) = gauss_expected_loglik(base.components[m], reduced.components[l]);
    }
  }
  return out;
}

EmissionResponsibility gmm_responsibilities(const GaussianMixture& reduced,
                                            const Eigen::MatrixXd& cross_loglik) {
  EmissionResponsibility r;
  r.eta.resize(cross_loglik.rows(), cross_loglik.cols());
  Eigen::VectorXd scores(cross_loglik.cols());
  for (Eigen::Index m = 0; m < cross_loglik.rows(); ++m) {
    for (Eigen::Index l = 0; l < cross_loglik.cols(); ++l) {
      scores[l] = safe_log(reduced.weights[l]) + cross_loglik(m, l);
    }
    r.eta.row(m) = solve_softmax_log(scores).probabilities.transpose();
  }
  return r;
}

EmissionResponsibility gmm_responsibilities(const GaussianMixture& base,
                                            const GaussianMixture& reduced) {
  return gmm_responsibilities(reduced, gauss_expected_loglik_matrix(base, reduced));
}

double gmm_expected_loglik_bound(const GaussianMixture& base, const GaussianMixture& reduced,
                                 const EmissionResponsibility& eta) {
  const Eigen::MatrixXd cross = gauss_expected_loglik_matrix(base, reduced);
  if (eta.eta.rows() != cross.rows() || eta.eta.cols() != cross.cols()) {
    throw DimensionMismatchError("responsibility matrix shape does not match mixtures");
  }
  double total = 0.0;
  for (int m = 0; m < base.size(); ++m) {
    if (base.weights[m] == 0.0) continue;
    double row = 0.0;
    for (int l = 0; l < reduced.size(); ++l) {
      const double e = eta.eta(m, l);
      if (e == 0.0) continue;
      row += e * (safe_log(reduced.weights[l]) + cross(m, l) - std::log(e));
    }
    total += base.weights[m] * row;
  }
  return total;
}

double gmm_expected_loglik_opt(const GaussianMixture& base, const GaussianMixture& reduced,
                               const Eigen::MatrixXd& cross_loglik) {
  double total = 0.0;
  Eigen::VectorXd scores(reduced.size());
  for (int m = 0; m < base.size(); ++m) {
    if (base.weights[m] == 0.0) continue;
    for (int l = 0; l < reduced.size(); ++l) {
      scores[l] = safe_log(reduced.weights[l]) + cross_loglik(m, l);
    }
    total += base.weights[m] * log_sum_exp(scores);
  }
  return total;
}

double gmm_expected_loglik_opt(const GaussianMixture& base, const GaussianMixture& reduced) {
  return gmm_expected_loglik_opt(base, reduced, gauss_expected_loglik_matrix(base, reduced));
}

Eigen::VectorXd solve_weighted_log(std::span<const double> beta) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(beta.size()));
  double total = 0.0;
  for (std::size_t l = 0; l < beta.size(); ++l) {
    if (beta[l] < 0.0 || !std::isfinite(beta[l])) {
      throw ValidationError("weighted-log solver needs finite nonnegative inputs");
    }
    total += beta[l];
  }
  if (!(total > 0.0)) throw DegenerateWeightsError("all weights are zero");
  for (std::size_t l = 0; l < beta.size(); ++l) out[static_cast<Eigen::Index>(l)] = beta[l] / total;
  return out;
}

Eigen::VectorXd solve_weighted_log(const Eigen::Ref<const Eigen::VectorXd>& beta) {
  return solve_weighted_log(std::span<const double>(beta.data(), static_cast<std::size_t>(beta.size())));
}

SoftmaxSolution solve_softmax_log(std::span<const double> beta) {
  SoftmaxSolution out;
  out.optimum = log_sum_exp(beta);
  if (out.optimum == kNegInf || std::isnan(out.optimum)) {
    throw DegenerateWeightsError("all log-weights are -inf");
  }
  out.probabilities.resize(static_cast<Eigen::Index>(beta.size()));
  for (std::size_t l = 0; l < beta.size(); ++l) {
    out.probabilities[static_cast<Eigen::Index>(l)] =
        beta[l] == kNegInf ? 0.0 : std::exp(beta[l] - out.optimum);
  }
  // Renormalize so the simplex constraint holds to rounding.
  out.probabilities /= out.probabilities.sum();
  return out;
}

SoftmaxSolution solve_softmax_log(const Eigen::Ref<const Eigen::VectorXd>& beta) {
  return solve_softmax_log(std::span<const double>(beta.data(), static_cast<std::size_t>(beta.size())));
}

void apply_covariance_floor(Gaussian& g, double floor) {
  if (g.type == CovarianceType::Diagonal) {
    Eigen::VectorXd var = g.covariance.diagonal().cwiseMax(floor);
    g.covariance = var.asDiagonal();
    return;
  }
  g.covariance = 0.5 * (g.covariance + g.covariance.transpose()).eval();
  for (Eigen::Index k = 0; k < g.covariance.rows(); ++k) {
    g.covariance(k, k) = std::max(g.covariance(k, k), floor);
  }
}

}  // namespace vhem
