#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vhem/gaussian.hpp"
#include "vhem/random.hpp"

namespace vhem {

/// Hidden Markov model with Gaussian-mixture emissions. All states share the
/// number of mixture components and the observation dimension.
struct Hmm {
  Eigen::VectorXd initial;            // pi, length N
  Eigen::MatrixXd transitions;        // A(from, to), N x N, row-stochastic
  std::vector<GaussianMixture> emissions;

  int n_states() const { return static_cast<int>(initial.size()); }
  int n_mix() const { return emissions.empty() ? 0 : emissions.front().size(); }
  int dim() const { return emissions.empty() ? 0 : emissions.front().dim(); }
  CovarianceType covariance_type() const;

  /// Checks stochasticity (tolerance `tol`), shapes and covariances.
  void validate(double cov_floor = 0.0, double tol = 1e-9) const;
};

/// Observations of one sequence, one row per time step.
struct Sequence {
  Eigen::MatrixXd observations;  // tau x d
  std::string id;
  std::optional<std::string> label;

  int length() const { return static_cast<int>(observations.rows()); }
  int dim() const { return static_cast<int>(observations.cols()); }
};

struct SampledSequence {
  Sequence sequence;
  std::vector<int> states;
};

struct EmConfig {
  int max_iters = 100;
  double tol = 1e-6;  // stop when relative log-likelihood improvement < tol
  double cov_floor = kDefaultCovFloor;
  CovarianceType cov_type = CovarianceType::Diagonal;
};

struct HmmFit {
  Hmm model;
  std::vector<double> loglik_trace;  // total log-likelihood of each visited model
  int iterations = 0;
  bool converged = false;
};

/// log p(y_{1:tau} | model) via the scaled forward recursion.
double forward_loglik(const Hmm& model, const Sequence& seq);

/// Caches the per-component density factorizations of one model so many
/// sequences can be scored without refactorizing covariances.
class HmmScorer {
 public:
  explicit HmmScorer(const Hmm& model);

  double loglik(const Sequence& seq) const;
  const Hmm& model() const { return *model_; }

 private:
  const Hmm* model_;
  std::vector<std::vector<GaussianDensity>> densities_;
};

/// Draws a state path from (pi, A) and observations from the state GMMs.
SampledSequence sample(const Hmm& model, int tau, Rng& rng);

/// Prior state occupancy P(x_t = state), tau x N; row 0 is pi.
Eigen::MatrixXd state_marginals(const Hmm& model, int tau);

/// Maximum-likelihood fit with Baum-Welch. Emission means are seeded with
/// k-means on the pooled observations; pi and A start near uniform with a
/// seed-controlled Dirichlet jitter.
HmmFit baum_welch(const std::vector<Sequence>& data, int n_states, int n_mix,
                  const EmConfig& config, Rng& rng);

/// Seed model used by baum_welch (exposed for the mixture estimator).
Hmm initialize_hmm(const std::vector<const Sequence*>& data, int n_states, int n_mix,
                   const EmConfig& config, Rng& rng);

/// One Baum-Welch update with per-sequence weights. Returns the weighted
/// log-likelihood of `model` (before the update) and writes the updated
/// parameters to `updated`.
double weighted_baum_welch_step(const Hmm& model, const std::vector<const Sequence*>& data,
                                const std::vector<double>& weights, const EmConfig& config,
                                Hmm& updated);

/// Per-(t, state) log emission densities, tau x N.
Eigen::MatrixXd emission_log_densities(const Hmm& model, const Sequence& seq);

}  // namespace vhem
