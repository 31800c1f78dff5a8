#include "vhem/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "vhem/errors.hpp"
#include "vhem/logmath.hpp"
#include "vhem/random.hpp"

namespace vhem {

namespace {

void check_stochastic(const Eigen::Ref<const Eigen::VectorXd>& p, double tol, const std::string& what) {
  if (!p.allFinite() || (p.array() < 0.0).any()) {
    throw InvalidModelError(what + " has negative or non-finite entries");
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " sums to " << total << " (expected 1)";
    throw InvalidModelError(msg.str());
  }
}

std::vector<std::vector<GaussianDensity>> prepare_densities(const Hmm& model) {
  std::vector<std::vector<GaussianDensity>> out(model.n_states());
  for (int s = 0; s < model.n_states(); ++s) {
    out[s].reserve(model.emissions[s].size());
    for (const auto& g : model.emissions[s].components) out[s].emplace_back(g);
  }
  return out;
}

void check_sequence(const Hmm& model, const Sequence& seq) {
  if (seq.length() < 1) throw ValidationError("sequence '" + seq.id + "' is empty");
  if (seq.dim() != model.dim()) {
    std::ostringstream msg;
    msg << "sequence '" << seq.id << "' has dimension " << seq.dim() << ", model expects "
        << model.dim();
    throw DimensionMismatchError(msg.str());
  }
}

// Per-(t, state, component) log c_m N(y_t; m) plus the state-level mixture
// log-density, tau x N.
struct EmissionTerms {
  std::vector<Eigen::MatrixXd> component;  // per t: N x M
  Eigen::MatrixXd state;                   // tau x N
};

EmissionTerms emission_terms(const Hmm& model,
                             const std::vector<std::vector<GaussianDensity>>& densities,
                             const Sequence& seq) {
  const int tau = seq.length();
  const int n = model.n_states();
  const int m_count = model.n_mix();
  EmissionTerms out;
  out.component.assign(tau, Eigen::MatrixXd(n, m_count));
  out.state.resize(tau, n);
  for (int t = 0; t < tau; ++t) {
    const Eigen::VectorXd y = seq.observations.row(t).transpose();
    for (int s = 0; s < n; ++s) {
      const auto& gmm = model.emissions[s];
      for (int m = 0; m < m_count; ++m) {
        out.component[t](s, m) = safe_log(gmm.weights[m]) + densities[s][m].log_density(y);
      }
      out.state(t, s) = log_sum_exp(Eigen::VectorXd(out.component[t].row(s).transpose()));
    }
  }
  return out;
}

// Scaled forward pass. alpha rows are normalized; log(scale[t]) + shift_t is
// the per-step contribution to the log-likelihood.
struct ForwardPass {
  Eigen::MatrixXd alpha;     // tau x N
  Eigen::VectorXd scale;     // c_t in the shifted domain
  Eigen::MatrixXd emission;  // exp(log b_t(s) - shift_t)
  double loglik = 0.0;
};

ForwardPass forward_pass(const Hmm& model, const Eigen::MatrixXd& log_b) {
  const Eigen::Index tau = log_b.rows();
  const Eigen::Index n = log_b.cols();
  ForwardPass f;
  f.alpha.resize(tau, n);
  f.scale.resize(tau);
  f.emission.resize(tau, n);
  for (Eigen::Index t = 0; t < tau; ++t) {
    const double shift = log_b.row(t).maxCoeff();
    if (shift == kNegInf) throw NumericalError("observation has zero density under every state");
    f.emission.row(t) = (log_b.row(t).array() - shift).exp();
    Eigen::RowVectorXd a;
    if (t == 0) {
      a = model.initial.transpose().array() * f.emission.row(t).array();
    } else {
      a = (f.alpha.row(t - 1) * model.transitions).array() * f.emission.row(t).array();
    }
    const double c = a.sum();
    if (!(c > 0.0)) throw NumericalError("forward recursion underflowed to zero");
    f.alpha.row(t) = a / c;
    f.scale[t] = c;
    f.loglik += std::log(c) + shift;
  }
  return f;
}

}  // namespace

CovarianceType Hmm::covariance_type() const {
  if (emissions.empty() || emissions.front().components.empty()) return CovarianceType::Diagonal;
  return emissions.front().components.front().type;
}

void Hmm::validate(double cov_floor, double tol) const {
  const int n = n_states();
  if (n < 1) throw InvalidModelError("hmm has no states");
  if (transitions.rows() != n || transitions.cols() != n) {
    throw InvalidModelError("transition matrix shape does not match the number of states");
  }
  if (static_cast<int>(emissions.size()) != n) {
    throw InvalidModelError("emission count does not match the number of states");
  }
  check_stochastic(initial, tol, "initial distribution");
  for (int s = 0; s < n; ++s) {
    check_stochastic(transitions.row(s).transpose(), tol, "transition row " + std::to_string(s));
  }
  const int m = emissions.front().size();
  const int d = emissions.front().dim();
  for (int s = 0; s < n; ++s) {
    if (emissions[s].size() != m || emissions[s].dim() != d) {
      throw InvalidModelError("emission mixtures differ in size or dimension");
    }
    emissions[s].validate(cov_floor);
  }
}

Eigen::MatrixXd emission_log_densities(const Hmm& model, const Sequence& seq) {
  check_sequence(model, seq);
  return emission_terms(model, prepare_densities(model), seq).state;
}

double forward_loglik(const Hmm& model, const Sequence& seq) {
  return HmmScorer(model).loglik(seq);
}

HmmScorer::HmmScorer(const Hmm& model) : model_(&model), densities_(prepare_densities(model)) {}

double HmmScorer::loglik(const Sequence& seq) const {
  check_sequence(*model_, seq);
  return forward_pass(*model_, emission_terms(*model_, densities_, seq).state).loglik;
}

SampledSequence sample(const Hmm& model, int tau, Rng& rng) {
  if (tau < 1) throw ValidationError("sample length must be >= 1");
  const int d = model.dim();
  // Per-component affine maps y = mu + L z.
  std::vector<std::vector<Eigen::MatrixXd>> factors(model.n_states());
  for (int s = 0; s < model.n_states(); ++s) {
    for (const auto& g : model.emissions[s].components) {
      if (g.type == CovarianceType::Diagonal) {
        factors[s].push_back(g.covariance.diagonal().cwiseSqrt().asDiagonal());
      } else {
        Eigen::LLT<Eigen::MatrixXd> llt(g.covariance);
        if (llt.info() != Eigen::Success) throw InvalidModelError("covariance is not positive definite");
        factors[s].push_back(llt.matrixL());
      }
    }
  }
  SampledSequence out;
  out.sequence.observations.resize(tau, d);
  out.states.resize(tau);
  std::normal_distribution<double> normal(0.0, 1.0);
  int state = draw_categorical(model.initial, rng);
  for (int t = 0; t < tau; ++t) {
    if (t > 0) state = draw_categorical(model.transitions.row(state).transpose(), rng);
    out.states[t] = state;
    const auto& gmm = model.emissions[state];
    const int comp = draw_categorical(gmm.weights, rng);
    Eigen::VectorXd z(d);
    for (int k = 0; k < d; ++k) z[k] = normal(rng);
    out.sequence.observations.row(t) =
        (gmm.components[comp].mean + factors[state][comp] * z).transpose();
  }
  return out;
}

Eigen::MatrixXd state_marginals(const Hmm& model, int tau) {
  if (tau < 1) throw ValidationError("tau must be >= 1");
  Eigen::MatrixXd out(tau, model.n_states());
  out.row(0) = model.initial.transpose();
  for (int t = 1; t < tau; ++t) out.row(t) = out.row(t - 1) * model.transitions;
  return out;
}

double weighted_baum_welch_step(const Hmm& model, const std::vector<const Sequence*>& data,
                                const std::vector<double>& weights, const EmConfig& config,
                                Hmm& updated) {
  const int n = model.n_states();
  const int m_count = model.n_mix();
  const int d = model.dim();
  const auto densities = prepare_densities(model);

  Eigen::VectorXd init_acc = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd trans_acc = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd comp_mass = Eigen::MatrixXd::Zero(n, m_count);
  std::vector<Eigen::VectorXd> comp_sum(n * m_count, Eigen::VectorXd::Zero(d));
  // Posterior component occupancies kept for the centered covariance pass.
  std::vector<std::vector<Eigen::MatrixXd>> occupancy(data.size());

  double total_ll = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Sequence& seq = *data[k];
    check_sequence(model, seq);
    const double w = weights[k];
    const EmissionTerms terms = emission_terms(model, densities, seq);
    const ForwardPass f = forward_pass(model, terms.state);
    total_ll += w * f.loglik;
    if (w == 0.0) continue;

    const int tau = seq.length();
    Eigen::MatrixXd beta(tau, n);
    beta.row(tau - 1).setOnes();
    for (int t = tau - 2; t >= 0; --t) {
      const Eigen::RowVectorXd next = beta.row(t + 1).array() * f.emission.row(t + 1).array();
      beta.row(t) = (model.transitions * next.transpose()).transpose() / f.scale[t + 1];
    }

    occupancy[k].resize(tau);
    for (int t = 0; t < tau; ++t) {
      Eigen::RowVectorXd gamma = f.alpha.row(t).array() * beta.row(t).array();
      gamma /= gamma.sum();
      if (t == 0) init_acc += w * gamma.transpose();
      if (t + 1 < tau) {
        const Eigen::RowVectorXd next = beta.row(t + 1).array() * f.emission.row(t + 1).array();
        Eigen::MatrixXd xi = (f.alpha.row(t).transpose() * next).cwiseProduct(model.transitions);
        trans_acc += w * xi / xi.sum();
      }
      Eigen::MatrixXd occ(n, m_count);
      for (int s = 0; s < n; ++s) {
        for (int m = 0; m < m_count; ++m) {
          const double r = terms.component[t](s, m) == kNegInf
                               ? 0.0
                               : gamma[s] * std::exp(terms.component[t](s, m) - terms.state(t, s));
          occ(s, m) = w * r;
          comp_mass(s, m) += w * r;
          comp_sum[s * m_count + m] += w * r * seq.observations.row(t).transpose();
        }
      }
      occupancy[k][t] = std::move(occ);
    }
  }

  updated = model;
  if (init_acc.sum() > 0.0) updated.initial = init_acc / init_acc.sum();
  for (int s = 0; s < n; ++s) {
    const double row = trans_acc.row(s).sum();
    if (row > 0.0) updated.transitions.row(s) = trans_acc.row(s) / row;
  }

  std::vector<Eigen::MatrixXd> comp_scatter(n * m_count, Eigen::MatrixXd::Zero(d, d));
  std::vector<Eigen::VectorXd> new_means(n * m_count);
  for (int s = 0; s < n; ++s) {
    for (int m = 0; m < m_count; ++m) {
      const int idx = s * m_count + m;
      new_means[idx] = comp_mass(s, m) > 0.0 ? Eigen::VectorXd(comp_sum[idx] / comp_mass(s, m))
                                             : model.emissions[s].components[m].mean;
    }
  }
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (occupancy[k].empty()) continue;
    const Sequence& seq = *data[k];
    for (int t = 0; t < seq.length(); ++t) {
      for (int s = 0; s < n; ++s) {
        for (int m = 0; m < m_count; ++m) {
          const double r = occupancy[k][t](s, m);
          if (r == 0.0) continue;
          const int idx = s * m_count + m;
          const Eigen::VectorXd diff = seq.observations.row(t).transpose() - new_means[idx];
          if (config.cov_type == CovarianceType::Diagonal) {
            comp_scatter[idx].diagonal() += r * diff.array().square().matrix();
          } else {
            comp_scatter[idx] += r * diff * diff.transpose();
          }
        }
      }
    }
  }

  constexpr double kMinMass = 1e-300;
  for (int s = 0; s < n; ++s) {
    auto& gmm = updated.emissions[s];
    const double state_mass = comp_mass.row(s).sum();
    if (!(state_mass > kMinMass)) continue;
    gmm.weights = comp_mass.row(s).transpose() / state_mass;
    for (int m = 0; m < m_count; ++m) {
      const int idx = s * m_count + m;
      if (!(comp_mass(s, m) > kMinMass)) continue;
      Gaussian& g = gmm.components[m];
      g.mean = new_means[idx];
      g.covariance = comp_scatter[idx] / comp_mass(s, m);
      g.type = config.cov_type;
      apply_covariance_floor(g, config.cov_floor);
    }
  }
  return total_ll;
}

Hmm initialize_hmm(const std::vector<const Sequence*>& data, int n_states, int n_mix,
                   const EmConfig& config, Rng& rng) {
  if (data.empty()) throw EstimationError("no training sequences");
  if (n_states < 1 || n_mix < 1) throw ValidationError("n_states and n_mix must be >= 1");
  const int d = data.front()->dim();
  Eigen::Index total = 0;
  for (const Sequence* s : data) {
    if (s->dim() != d) throw DimensionMismatchError("training sequences differ in dimension");
    if (s->length() < 1) throw ValidationError("training sequence '" + s->id + "' is empty");
    total += s->length();
  }
  Eigen::MatrixXd pooled(total, d);
  Eigen::Index row = 0;
  for (const Sequence* s : data) {
    pooled.middleRows(row, s->length()) = s->observations;
    row += s->length();
  }
  if (count_distinct_rows(pooled) < n_states * n_mix) {
    std::ostringstream msg;
    msg << "training data has fewer distinct observation vectors than the " << n_states * n_mix
        << " emission components requested";
    throw EstimationError(msg.str());
  }

  const Eigen::VectorXd global_var =
      ((pooled.rowwise() - pooled.colwise().mean()).array().square().colwise().sum() /
       static_cast<double>(total))
          .transpose()
          .cwiseMax(config.cov_floor);

  const KMeansResult states = kmeans(pooled, n_states, rng);
  Hmm model;
  model.emissions.resize(n_states);
  for (int s = 0; s < n_states; ++s) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index r = 0; r < total; ++r) {
      if (states.labels[r] == s) members.push_back(r);
    }
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(members.size()), d);
    for (std::size_t r = 0; r < members.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = pooled.row(members[r]);
    if (count_distinct_rows(sub) < n_mix) sub = pooled;
    const KMeansResult comps = kmeans(sub, n_mix, rng);

    GaussianMixture gmm;
    gmm.weights.resize(n_mix);
    for (int m = 0; m < n_mix; ++m) {
      std::vector<Eigen::Index> rows;
      for (Eigen::Index r = 0; r < sub.rows(); ++r) {
        if (comps.labels[r] == m) rows.push_back(r);
      }
      gmm.weights[m] = static_cast<double>(rows.size()) + 1.0;
      Eigen::MatrixXd cov = global_var.asDiagonal();
      if (rows.size() >= 2) {
        Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), d);
        for (std::size_t r = 0; r < rows.size(); ++r) pts.row(static_cast<Eigen::Index>(r)) = sub.row(rows[r]);
        const Eigen::MatrixXd centered = pts.rowwise() - comps.centers.row(m);
        cov = centered.transpose() * centered / static_cast<double>(rows.size());
        if (config.cov_type == CovarianceType::Diagonal) cov = Eigen::MatrixXd(cov.diagonal().asDiagonal());
      }
      Gaussian g(comps.centers.row(m).transpose(), cov, config.cov_type);
      apply_covariance_floor(g, config.cov_floor);
      if (config.cov_type == CovarianceType::Full) {
        Eigen::LLT<Eigen::MatrixXd> llt(g.covariance);
        if (llt.info() != Eigen::Success) g.covariance = global_var.asDiagonal();
      }
      gmm.components.push_back(std::move(g));
    }
    gmm.weights /= gmm.weights.sum();
    model.emissions[s] = std::move(gmm);
  }

  constexpr double kJitter = 0.1;
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
  model.initial = (1.0 - kJitter) * uniform + kJitter * draw_dirichlet(n_states, 1.0, rng);
  model.transitions.resize(n_states, n_states);
  for (int s = 0; s < n_states; ++s) {
    model.transitions.row(s) =
        ((1.0 - kJitter) * uniform + kJitter * draw_dirichlet(n_states, 1.0, rng)).transpose();
  }
  return model;
}

HmmFit baum_welch(const std::vector<Sequence>& data, int n_states, int n_mix,
                  const EmConfig& config, Rng& rng) {
  std::vector<const Sequence*> refs;
  refs.reserve(data.size());
  for (const auto& s : data) refs.push_back(&s);
  const std::vector<double> ones(data.size(), 1.0);

  HmmFit fit;
  fit.model = initialize_hmm(refs, n_states, n_mix, config, rng);
  Hmm updated;
  for (int it = 0;; ++it) {
    const double ll = weighted_baum_welch_step(fit.model, refs, ones, config, updated);
    fit.loglik_trace.push_back(ll);
    if (it > 0) {
      const double prev = fit.loglik_trace[fit.loglik_trace.size() - 2];
      if ((ll - prev) / std::abs(prev) < config.tol) {
        fit.converged = true;
        break;
      }
    }
    if (it >= config.max_iters) break;
    fit.model = std::move(updated);
    fit.iterations = it + 1;
  }
  return fit;
}

}  // namespace vhem
