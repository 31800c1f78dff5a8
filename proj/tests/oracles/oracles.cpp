#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace oracle {

namespace {

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double hi = std::max(a, b);
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

Eigen::MatrixXd effective_cov(const vhem::Gaussian& g) {
  if (g.type == vhem::CovarianceType::Diagonal) return g.covariance.diagonal().asDiagonal();
  return g.covariance;
}

double log_normal(const vhem::Gaussian& g, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd cov = effective_cov(g);
  const Eigen::VectorXd diff = y - g.mean;
  const double quad = diff.dot(cov.inverse() * diff);
  return -0.5 * (static_cast<double>(g.dim()) * std::log(2.0 * std::numbers::pi) +
                 std::log(cov.determinant()) + quad);
}

double gmm_log_density(const vhem::GaussianMixture& mix, const Eigen::VectorXd& y) {
  double acc = -INFINITY;
  for (int l = 0; l < mix.size(); ++l) {
    acc = log_add(acc, std::log(mix.weights[l]) + log_normal(mix.components[l], y));
  }
  return acc;
}

// Emission bound for every (beta, rho) state pair.
std::vector<std::vector<double>> state_bounds(const vhem::Hmm& base, const vhem::Hmm& reduced) {
  std::vector<std::vector<double>> out(base.n_states(), std::vector<double>(reduced.n_states()));
  for (int b = 0; b < base.n_states(); ++b) {
    for (int r = 0; r < reduced.n_states(); ++r) {
      out[b][r] = gmm_cross_opt(base.emissions[b], reduced.emissions[r]);
    }
  }
  return out;
}

// Calls visit(path) for every sequence in {0..n-1}^len.
void for_each_path(int n, int len, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> path(len, 0);
  if (len == 0) {
    visit(path);
    return;
  }
  while (true) {
    visit(path);
    int pos = len - 1;
    while (pos >= 0 && ++path[pos] == n) {
      path[pos] = 0;
      --pos;
    }
    if (pos < 0) return;
  }
}

double path_log_prob(const vhem::Hmm& m, const std::vector<int>& path) {
  double lp = std::log(m.initial[path[0]]);
  for (std::size_t t = 1; t < path.size(); ++t) lp += std::log(m.transitions(path[t - 1], path[t]));
  return lp;
}

// Box-Muller standard normal draws from an explicitly seeded engine.
class NormalSource {
 public:
  explicit NormalSource(unsigned seed) : engine_(seed) {}
  double uniform() { return (static_cast<double>(engine_()) + 0.5) / 4294967296.0; }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return radius * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

double gauss_cross(const vhem::Gaussian& base, const vhem::Gaussian& reduced) {
  const Eigen::MatrixXd sb = effective_cov(base);
  const Eigen::MatrixXd sr = effective_cov(reduced);
  const Eigen::MatrixXd inv = sr.inverse();
  const Eigen::VectorXd diff = reduced.mean - base.mean;
  const double d = static_cast<double>(base.dim());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + std::log(sr.determinant()) +
                 (inv * sb).trace() + diff.dot(inv * diff));
}

double gmm_cross_opt(const vhem::GaussianMixture& base, const vhem::GaussianMixture& reduced) {
  double total = 0.0;
  for (int m = 0; m < base.size(); ++m) {
    double inner = -INFINITY;
    for (int l = 0; l < reduced.size(); ++l) {
      inner = log_add(inner, std::log(reduced.weights[l]) +
                                 gauss_cross(base.components[m], reduced.components[l]));
    }
    total += base.weights[m] * inner;
  }
  return total;
}

McResult gmm_cross_mc(const vhem::GaussianMixture& base, const vhem::GaussianMixture& reduced,
                      int n_samples, unsigned seed) {
  NormalSource src(seed);
  std::vector<Eigen::MatrixXd> factors;
  for (const auto& g : base.components) factors.push_back(effective_cov(g).llt().matrixL());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int n = 0; n < n_samples; ++n) {
    double u = src.uniform();
    int m = 0;
    while (m + 1 < base.size() && u > base.weights[m]) u -= base.weights[m++];
    Eigen::VectorXd z(base.dim());
    for (int k = 0; k < base.dim(); ++k) z[k] = src.normal();
    const Eigen::VectorXd y = base.components[m].mean + factors[m] * z;
    const double v = gmm_log_density(reduced, y);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n_samples;
  const double var = (sum_sq - n_samples * mean * mean) / (n_samples - 1);
  return {mean, std::sqrt(std::max(var, 0.0) / n_samples)};
}

double elhmm_evaluate(const vhem::Hmm& base, const vhem::Hmm& reduced, int tau,
                      const FactoredPosterior& phi) {
  const auto ell = state_bounds(base, reduced);
  const int nb = base.n_states();
  const int nr = reduced.n_states();
  double total = 0.0;
  for_each_path(nb, tau, [&](const std::vector<int>& beta) {
    const double pb = std::exp(path_log_prob(base, beta));
    if (pb == 0.0) return;
    for_each_path(nr, tau, [&](const std::vector<int>& rho) {
      double q = phi.initial(rho[0], beta[0]);
      for (int t = 1; t < tau; ++t) q *= phi.step(t + 1, rho[t - 1], rho[t], beta[t]);
      if (q == 0.0) return;
      double value = path_log_prob(reduced, rho) - std::log(q);
      for (int t = 0; t < tau; ++t) value += ell[beta[t]][rho[t]];
      total += pb * q * value;
    });
  });
  return total;
}

double elhmm_bruteforce(const vhem::Hmm& base, const vhem::Hmm& reduced, int tau) {
  const auto ell = state_bounds(base, reduced);
  const int nb = base.n_states();
  const int nr = reduced.n_states();
  // step[t][rho_prev][rho][beta] for t = 2..tau; initial[rho][beta].
  std::vector<std::vector<std::vector<std::vector<double>>>> step(
      tau + 1, std::vector<std::vector<std::vector<double>>>(
                   nr, std::vector<std::vector<double>>(nr, std::vector<double>(nb, 0.0))));
  std::vector<std::vector<double>> initial(nr, std::vector<double>(nb, 0.0));

  // Expected contribution of stages t+1..tau given (beta_t, rho_t), using the
  // fixed later stages, by enumerating every continuation.
  auto continuation_value = [&](int t, int beta_t, int rho_t) {
    const int len = tau - t;
    if (len == 0) return 0.0;
    double value = 0.0;
    for_each_path(nb, len, [&](const std::vector<int>& beta) {
      double pb = base.transitions(beta_t, beta[0]);
      for (int k = 1; k < len; ++k) pb *= base.transitions(beta[k - 1], beta[k]);
      if (pb == 0.0) return;
      for_each_path(nr, len, [&](const std::vector<int>& rho) {
        double q = 1.0;
        double v = 0.0;
        int prev = rho_t;
        for (int k = 0; k < len; ++k) {
          const double s = step[t + 1 + k][prev][rho[k]][beta[k]];
          q *= s;
          if (s == 0.0) break;
          v += std::log(reduced.transitions(prev, rho[k])) - std::log(s) + ell[beta[k]][rho[k]];
          prev = rho[k];
        }
        if (q == 0.0) return;
        value += pb * q * v;
      });
    });
    return value;
  };

  auto softmax = [](std::vector<double> scores) {
    double norm = -INFINITY;
    for (double s : scores) norm = log_add(norm, s);
    for (double& s : scores) s = std::exp(s - norm);
    return scores;
  };

  for (int t = tau; t >= 2; --t) {
    for (int beta = 0; beta < nb; ++beta) {
      std::vector<double> future(nr);
      for (int rho = 0; rho < nr; ++rho) future[rho] = continuation_value(t, beta, rho);
      for (int prev = 0; prev < nr; ++prev) {
        std::vector<double> scores(nr);
        for (int rho = 0; rho < nr; ++rho) {
          scores[rho] = std::log(reduced.transitions(prev, rho)) + ell[beta][rho] + future[rho];
        }
        const auto p = softmax(scores);
        for (int rho = 0; rho < nr; ++rho) step[t][prev][rho][beta] = p[rho];
      }
    }
  }
  for (int beta = 0; beta < nb; ++beta) {
    std::vector<double> scores(nr);
    for (int rho = 0; rho < nr; ++rho) {
      scores[rho] = std::log(reduced.initial[rho]) + ell[beta][rho] + continuation_value(1, beta, rho);
    }
    const auto p = softmax(scores);
    for (int rho = 0; rho < nr; ++rho) initial[rho][beta] = p[rho];
  }

  FactoredPosterior phi;
  phi.initial = [&](int rho, int beta) { return initial[rho][beta]; };
  phi.step = [&](int t, int prev, int rho, int beta) { return step[t][prev][rho][beta]; };
  return elhmm_evaluate(base, reduced, tau, phi);
}

double forward_enumeration(const vhem::Hmm& model, const vhem::Sequence& seq) {
  const int tau = seq.length();
  double acc = -INFINITY;
  for_each_path(model.n_states(), tau, [&](const std::vector<int>& path) {
    double lp = path_log_prob(model, path);
    for (int t = 0; t < tau; ++t) {
      lp += gmm_log_density(model.emissions[path[t]], seq.observations.row(t).transpose());
    }
    acc = log_add(acc, lp);
  });
  return acc;
}

Eigen::MatrixXd marginals_enumeration(const vhem::Hmm& model, int tau) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(tau, model.n_states());
  for_each_path(model.n_states(), tau, [&](const std::vector<int>& path) {
    const double p = std::exp(path_log_prob(model, path));
    for (int t = 0; t < tau; ++t) out(t, path[t]) += p;
  });
  return out;
}

double rand_index_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  long agree = 0;
  long total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      ++total;
      if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

vhem::Hmm random_hmm(const RandomHmmSpec& spec, vhem::Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto stochastic = [&](int n) {
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = 0.2 + unit(rng);
    return Eigen::VectorXd(v / v.sum());
  };
  vhem::Hmm h;
  h.initial = stochastic(spec.n_states);
  h.transitions.resize(spec.n_states, spec.n_states);
  for (int s = 0; s < spec.n_states; ++s) h.transitions.row(s) = stochastic(spec.n_states).transpose();
  for (int s = 0; s < spec.n_states; ++s) {
    vhem::GaussianMixture mix;
    mix.weights = stochastic(spec.n_mix);
    for (int m = 0; m < spec.n_mix; ++m) {
      Eigen::VectorXd mean(spec.dim);
      for (int k = 0; k < spec.dim; ++k) mean[k] = spec.mean_scale * normal(rng);
      if (spec.cov_type == vhem::CovarianceType::Diagonal) {
        Eigen::VectorXd var(spec.dim);
        for (int k = 0; k < spec.dim; ++k) var[k] = 0.3 + 1.5 * unit(rng);
        mix.components.push_back(vhem::Gaussian::diagonal(mean, var));
      } else {
        Eigen::MatrixXd root(spec.dim, spec.dim);
        for (int r = 0; r < spec.dim; ++r)
          for (int c = 0; c < spec.dim; ++c) root(r, c) = 0.5 * normal(rng);
        Eigen::MatrixXd cov = root * root.transpose() +
                              0.5 * Eigen::MatrixXd::Identity(spec.dim, spec.dim);
        mix.components.emplace_back(mean, cov, vhem::CovarianceType::Full);
      }
    }
    h.emissions.push_back(std::move(mix));
  }
  return h;
}

}  // namespace oracle
