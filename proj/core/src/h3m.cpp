#include "vhem/h3m.hpp"

#include <cmath>
#include <sstream>

#include "vhem/errors.hpp"
#include "vhem/gaussian.hpp"
#include "vhem/logmath.hpp"
#include "vhem/parallel.hpp"

namespace vhem {

namespace {

// Per-(sequence, component) forward log-likelihoods, n x K.
Eigen::MatrixXd component_logliks(const H3m& model, const std::vector<const Sequence*>& data,
                                  unsigned threads) {
  std::vector<HmmScorer> scorers;
  scorers.reserve(model.components.size());
  for (const auto& c : model.components) scorers.emplace_back(c);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(data.size()), model.size());
  parallel_for(data.size(), threads, [&](std::size_t n) {
    for (int k = 0; k < model.size(); ++k) {
      out(static_cast<Eigen::Index>(n), k) = scorers[k].loglik(*data[n]);
    }
  });
  return out;
}

struct EStep {
  Eigen::MatrixXd posteriors;
  Eigen::VectorXd per_sequence;  // log p(y_n | model)
  double total = 0.0;
};

EStep mixture_estep(const H3m& model, const Eigen::MatrixXd& logliks) {
  EStep e;
  e.posteriors.resize(logliks.rows(), logliks.cols());
  e.per_sequence.resize(logliks.rows());
  Eigen::VectorXd scores(logliks.cols());
  for (Eigen::Index n = 0; n < logliks.rows(); ++n) {
    for (Eigen::Index k = 0; k < logliks.cols(); ++k) {
      scores[k] = safe_log(model.weights[k]) + logliks(n, k);
    }
    const SoftmaxSolution sol = solve_softmax_log(scores);
    e.posteriors.row(n) = sol.probabilities.transpose();
    e.per_sequence[n] = sol.optimum;
    e.total += sol.optimum;
  }
  return e;
}

Eigen::VectorXd sequence_summary(const Sequence& s) {
  return s.observations.colwise().mean().transpose();
}

}  // namespace

void H3m::validate(double cov_floor, double tol) const {
  if (components.empty()) throw InvalidModelError("h3m has no components");
  if (weights.size() != size()) throw InvalidModelError("h3m weight count does not match component count");
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw InvalidModelError("h3m has negative or non-finite weights");
  }
  if (std::abs(weights.sum() - 1.0) > tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "h3m weights sum to " << weights.sum() << " (expected 1)";
    throw InvalidModelError(msg.str());
  }
  const int n = components.front().n_states();
  const int m = components.front().n_mix();
  const int d = components.front().dim();
  for (const auto& c : components) {
    c.validate(cov_floor, tol);
    if (c.n_states() != n || c.n_mix() != m || c.dim() != d) {
      throw InvalidModelError("h3m components differ in number of states, mixture size or dimension");
    }
  }
}

H3m H3m::uniform(std::vector<Hmm> models) {
  H3m out;
  out.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(models.size()),
                                          1.0 / static_cast<double>(models.size()));
  out.components = std::move(models);
  return out;
}

double h3m_loglik(const H3m& model, const Sequence& seq) {
  Eigen::VectorXd terms(model.size());
  for (int k = 0; k < model.size(); ++k) {
    terms[k] = safe_log(model.weights[k]) + forward_loglik(model.components[k], seq);
  }
  return log_sum_exp(terms);
}

Eigen::MatrixXd h3m_posteriors(const H3m& model, const std::vector<Sequence>& data,
                               unsigned threads) {
  std::vector<const Sequence*> refs;
  for (const auto& s : data) refs.push_back(&s);
  return mixture_estep(model, component_logliks(model, refs, threads)).posteriors;
}

H3mFit h3m_em(const std::vector<Sequence>& data, int k, int n_states, int n_mix,
              const EmConfig& config, Rng& rng, unsigned threads) {
  if (k < 1) throw ValidationError("number of mixture components must be >= 1");
  if (static_cast<int>(data.size()) < k) {
    throw EstimationError("fewer training sequences than mixture components");
  }
  std::vector<const Sequence*> refs;
  refs.reserve(data.size());
  for (const auto& s : data) refs.push_back(&s);
  const auto n_seq = static_cast<Eigen::Index>(data.size());

  H3mFit fit;
  fit.model.components.resize(k);
  if (k == 1) {
    fit.model.weights = Eigen::VectorXd::Ones(1);
    fit.model.components[0] = initialize_hmm(refs, n_states, n_mix, config, rng);
  } else {
    Eigen::MatrixXd summaries(n_seq, data.front().dim());
    for (Eigen::Index n = 0; n < n_seq; ++n) summaries.row(n) = sequence_summary(data[n]).transpose();
    const KMeansResult groups = kmeans(summaries, k, rng);
    fit.model.weights.resize(k);
    for (int c = 0; c < k; ++c) {
      std::vector<const Sequence*> members;
      for (Eigen::Index n = 0; n < n_seq; ++n) {
        if (groups.labels[n] == c) members.push_back(refs[n]);
      }
      if (members.empty()) {
        std::uniform_int_distribution<Eigen::Index> pick(0, n_seq - 1);
        members.push_back(refs[pick(rng)]);
      }
      fit.model.weights[c] = static_cast<double>(members.size());
      fit.model.components[c] = initialize_hmm(members, n_states, n_mix, config, rng);
    }
    fit.model.weights /= fit.model.weights.sum();
  }

  constexpr int kMaxReseeds = 2;
  const double min_mass = static_cast<double>(n_seq) / (10.0 * k);
  bool reseeded_last = false;
  for (int it = 0;; ++it) {
    const EStep e = mixture_estep(fit.model, component_logliks(fit.model, refs, threads));
    fit.loglik_trace.push_back(e.total);
    fit.posteriors = e.posteriors;
    if (it > 0 && !reseeded_last) {
      const double prev = fit.loglik_trace[fit.loglik_trace.size() - 2];
      if ((e.total - prev) / std::abs(prev) < config.tol) {
        fit.converged = true;
        break;
      }
    }
    if (it >= config.max_iters) break;

    H3m next = fit.model;
    const Eigen::VectorXd mass = e.posteriors.colwise().sum().transpose();
    next.weights = solve_weighted_log(mass);
    std::vector<double> weights(data.size());
    for (int c = 0; c < k; ++c) {
      for (Eigen::Index n = 0; n < n_seq; ++n) weights[n] = e.posteriors(n, c);
      weighted_baum_welch_step(fit.model.components[c], refs, weights, config, next.components[c]);
    }

    reseeded_last = false;
    for (int c = 0; c < k && k > 1; ++c) {
      if (mass[c] >= min_mass || static_cast<int>(fit.reseed_iterations.size()) >= kMaxReseeds) continue;
      Eigen::Index worst = 0;
      e.per_sequence.minCoeff(&worst);
      next.components[c] = initialize_hmm({refs[worst]}, n_states, n_mix, config, rng);
      next.weights[c] = std::max(next.weights[c], 1.0 / k);
      next.weights /= next.weights.sum();
      fit.reseed_iterations.push_back(it);
      reseeded_last = true;
    }
    fit.model = std::move(next);
    fit.iterations = it + 1;
  }
  return fit;
}

std::vector<LabeledSequence> h3m_sample(const H3m& model, int tau, int count, Rng& rng) {
  if (count < 0) throw ValidationError("sample count must be >= 0");
  std::vector<LabeledSequence> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    LabeledSequence s;
    s.component = draw_categorical(model.weights, rng);
    s.sequence = sample(model.components[s.component], tau, rng).sequence;
    out.push_back(std::move(s));
  }
  return out;
}

MonteCarloEstimate mc_expected_loglik(const Hmm& base, const Hmm& reduced, int tau,
                                      int n_samples, Rng& rng) {
  if (n_samples < 2) throw ValidationError("Monte Carlo estimate needs at least 2 samples");
  const HmmScorer scorer(reduced);
  // Welford accumulation keeps the variance accurate for large n.
  double mean = 0.0;
  double m2 = 0.0;
  for (int n = 0; n < n_samples; ++n) {
    const double x = scorer.loglik(sample(base, tau, rng).sequence);
    const double delta = x - mean;
    mean += delta / (n + 1);
    m2 += delta * (x - mean);
  }
  const double variance = m2 / (n_samples - 1);
  return {mean, std::sqrt(variance / n_samples)};
}

}  // namespace vhem
