#pragma once

#include <vector>

#include <Eigen/Core>

#include "vhem/hmm.hpp"

namespace vhem {

/// Mixture of HMMs: one component is selected per sequence with
/// probability weights[k].
struct H3m {
  Eigen::VectorXd weights;
  std::vector<Hmm> components;

  int size() const { return static_cast<int>(components.size()); }
  int n_states() const { return components.empty() ? 0 : components.front().n_states(); }
  int n_mix() const { return components.empty() ? 0 : components.front().n_mix(); }
  int dim() const { return components.empty() ? 0 : components.front().dim(); }

  void validate(double cov_floor = 0.0, double tol = 1e-9) const;

  /// Wraps models with uniform weights.
  static H3m uniform(std::vector<Hmm> models);
};

/// log sum_k w_k p(y | component k).
double h3m_loglik(const H3m& model, const Sequence& seq);

/// Posterior P(component k | sequence n), n x K, computed in log domain.
Eigen::MatrixXd h3m_posteriors(const H3m& model, const std::vector<Sequence>& data,
                               unsigned threads = 1);

struct H3mFit {
  H3m model;
  Eigen::MatrixXd posteriors;        // n x K, for the returned model
  std::vector<double> loglik_trace;  // total log-likelihood per visited model
  std::vector<int> reseed_iterations;
  int iterations = 0;
  bool converged = false;
};

/// Sequence-level mixture EM (one assignment per sequence). A component
/// whose responsibility mass drops below |data| / (10 K) is re-seeded from
/// the worst-explained sequence, at most twice per run.
H3mFit h3m_em(const std::vector<Sequence>& data, int k, int n_states, int n_mix,
              const EmConfig& config, Rng& rng, unsigned threads = 1);

struct LabeledSequence {
  Sequence sequence;
  int component = 0;
};

std::vector<LabeledSequence> h3m_sample(const H3m& model, int tau, int count, Rng& rng);

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

/// Empirical E_{y ~ base}[log p(y | reduced)] over n_samples sequences of
/// length tau, with the standard error of the mean.
MonteCarloEstimate mc_expected_loglik(const Hmm& base, const Hmm& reduced, int tau,
                                      int n_samples, Rng& rng);

}  // namespace vhem
