#pragma once

// Gaussian and Gaussian-mixture types, closed-form Gaussian cross expected
// log-likelihoods, and the variational GMM bound built on top of them.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vhem {

enum class CovarianceType { Diagonal, Full };

inline constexpr double kDefaultCovFloor = 1e-6;

const char* to_string(CovarianceType type);
CovarianceType covariance_type_from_string(const std::string& name);

/// Multivariate normal. Diagonal models keep a d x d matrix whose
/// off-diagonal entries are zero; only the diagonal is ever read.
struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  CovarianceType type = CovarianceType::Diagonal;

  Gaussian() = default;
  Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
           CovarianceType type = CovarianceType::Full);

  static Gaussian standard(int dim, CovarianceType type = CovarianceType::Diagonal);
  static Gaussian diagonal(Eigen::VectorXd mean, const Eigen::VectorXd& variances);

  int dim() const { return static_cast<int>(mean.size()); }

  /// Throws InvalidModelError unless the covariance is symmetric positive
  /// definite with every diagonal entry >= floor.
  void validate(double cov_floor = 0.0) const;

  double log_density(const Eigen::Ref<const Eigen::VectorXd>& y) const;
};

/// Precomputed Cholesky factor and log-determinant for repeated density
/// evaluation.
class GaussianDensity {
 public:
  explicit GaussianDensity(const Gaussian& g);

  double log_density(const Eigen::Ref<const Eigen::VectorXd>& y) const;
  double log_det() const { return log_det_; }
  int dim() const { return static_cast<int>(mean_.size()); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_lower_;   // full only
  Eigen::VectorXd inv_var_;      // diagonal only
  CovarianceType type_;
  double log_det_ = 0.0;
  double log_norm_ = 0.0;        // -0.5 * (d log 2pi + log|S|)
};

/// Emission density of one HMM state: sum_m c_m N(y; mu_m, S_m).
struct GaussianMixture {
  Eigen::VectorXd weights;
  std::vector<Gaussian> components;

  int size() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : components.front().dim(); }

  void validate(double cov_floor = 0.0) const;
  double log_density(const Eigen::Ref<const Eigen::VectorXd>& y) const;
};

/// eta(m, l): probability that base component m is modelled by reduced
/// component l. Rows are base components and sum to one.
struct EmissionResponsibility {
  Eigen::MatrixXd eta;
};

/// E_{y ~ base}[log N(y; reduced)], exact:
///   -1/2 [d log 2pi + log|S_r| + tr(S_r^-1 S_b) + (mu_r - mu_b)' S_r^-1 (mu_r - mu_b)]
double gauss_expected_loglik(const Gaussian& base, const Gaussian& reduced);

/// Matrix of gauss_expected_loglik over all (base m, reduced l) pairs.
Eigen::MatrixXd gauss_expected_loglik_matrix(const GaussianMixture& base,
                                             const GaussianMixture& reduced);

/// Optimal variational responsibilities: row m is the softmax over l of
/// log c_l + L_G(m, l).
EmissionResponsibility gmm_responsibilities(const GaussianMixture& base,
                                            const GaussianMixture& reduced);
EmissionResponsibility gmm_responsibilities(const GaussianMixture& reduced,
                                            const Eigen::MatrixXd& cross_loglik);

/// Variational lower bound on E_base[log p_reduced(y)] for an arbitrary
/// row-stochastic eta.
double gmm_expected_loglik_bound(const GaussianMixture& base, const GaussianMixture& reduced,
                                 const EmissionResponsibility& eta);

/// The bound at the optimal eta: sum_m c_m log sum_l c_l exp L_G(m, l).
double gmm_expected_loglik_opt(const GaussianMixture& base, const GaussianMixture& reduced);
double gmm_expected_loglik_opt(const GaussianMixture& base, const GaussianMixture& reduced,
                               const Eigen::MatrixXd& cross_loglik);

/// argmax_{alpha in simplex} sum_l beta_l log alpha_l = beta / sum(beta).
Eigen::VectorXd solve_weighted_log(std::span<const double> beta);
Eigen::VectorXd solve_weighted_log(const Eigen::Ref<const Eigen::VectorXd>& beta);

struct SoftmaxSolution {
  Eigen::VectorXd probabilities;
  double optimum = 0.0;  // log sum_l exp beta_l
};

/// argmax_{alpha in simplex} sum_l alpha_l (beta_l - log alpha_l) = softmax(beta).
/// Entries equal to -inf receive zero mass.
SoftmaxSolution solve_softmax_log(std::span<const double> beta);
SoftmaxSolution solve_softmax_log(const Eigen::Ref<const Eigen::VectorXd>& beta);

/// Clamps every covariance diagonal to >= floor; for diagonal models also
/// zeroes off-diagonal entries and symmetrizes full ones.
void apply_covariance_floor(Gaussian& g, double floor);

}  // namespace vhem
