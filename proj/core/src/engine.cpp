#include "vhem/engine.hpp"

#include <cmath>
#include <sstream>

#include "vhem/errors.hpp"
#include "vhem/logmath.hpp"
#include "vhem/parallel.hpp"

namespace vhem {

namespace {

void require_compatible(const Hmm& base, const Hmm& reduced) {
  if (base.dim() != reduced.dim()) {
    std::ostringstream msg;
    msg << "base and reduced HMMs differ in dimension (" << base.dim() << " vs " << reduced.dim() << ")";
    throw DimensionMismatchError(msg.str());
  }
}

Eigen::MatrixXd log_of(const Eigen::MatrixXd& p) {
  return p.unaryExpr([](double x) { return safe_log(x); });
}

void perturb_means(Hmm& model, double half_width, Rng& rng) {
  std::uniform_real_distribution<double> eps(-half_width, half_width);
  for (auto& gmm : model.emissions) {
    for (auto& g : gmm.components) {
      for (Eigen::Index k = 0; k < g.mean.size(); ++k) g.mean[k] *= 1.0 + eps(rng);
    }
  }
}

}  // namespace

const char* to_string(InitStrategy strategy) {
  switch (strategy) {
    case InitStrategy::SubsetPerturb: return "subset-perturb";
    case InitStrategy::Random: return "random";
    case InitStrategy::Provided: return "file";
  }
  return "?";
}

InitStrategy init_strategy_from_string(const std::string& name) {
  if (name == "subset-perturb") return InitStrategy::SubsetPerturb;
  if (name == "random") return InitStrategy::Random;
  if (name == "file" || name == "provided") return InitStrategy::Provided;
  throw ValidationError("unknown init strategy '" + name + "' (expected subset-perturb, random or file)");
}

PairEstepResult estep_pair(const Hmm& base, const Hmm& reduced, int tau) {
  require_compatible(base, reduced);
  if (tau < 1) throw ValidationError("virtual sequence length must be >= 1");
  const int nb = base.n_states();
  const int nr = reduced.n_states();

  PairEstepResult out;
  out.state_ell.resize(nb, nr);
  out.eta.resize(static_cast<std::size_t>(nb) * nr);
  for (int beta = 0; beta < nb; ++beta) {
    for (int rho = 0; rho < nr; ++rho) {
      const auto& b = base.emissions[beta];
      const auto& r = reduced.emissions[rho];
      const Eigen::MatrixXd cross = gauss_expected_loglik_matrix(b, r);
      out.eta[static_cast<std::size_t>(beta) * nr + rho] = gmm_responsibilities(r, cross);
      out.state_ell(beta, rho) = gmm_expected_loglik_opt(b, r, cross);
    }
  }

  const Eigen::MatrixXd log_a_r = log_of(reduced.transitions);
  const Eigen::VectorXd log_pi_r = log_of(reduced.initial);

  // future(beta, rho): value of the remaining steps given (beta_t, rho_t);
  // identically zero past the end of the sequence.
  Eigen::MatrixXd future = Eigen::MatrixXd::Zero(nb, nr);
  out.phi_step.assign(static_cast<std::size_t>(tau - 1), TransitionPosterior(nr, nb));
  Eigen::VectorXd scores(nr);
  Eigen::MatrixXd stage(nr, nb);
  for (int t = tau; t >= 2; --t) {
    TransitionPosterior& phi = out.phi_step[static_cast<std::size_t>(t - 2)];
    for (int beta = 0; beta < nb; ++beta) {
      for (int prev = 0; prev < nr; ++prev) {
        for (int rho = 0; rho < nr; ++rho) {
          scores[rho] = log_a_r(prev, rho) + out.state_ell(beta, rho) + future(beta, rho);
        }
        const SoftmaxSolution sol = solve_softmax_log(scores);
        for (int rho = 0; rho < nr; ++rho) phi(prev, rho, beta) = sol.probabilities[rho];
        stage(prev, beta) = sol.optimum;
      }
    }
    Eigen::MatrixXd next_future = Eigen::MatrixXd::Zero(nb, nr);
    for (int beta_prev = 0; beta_prev < nb; ++beta_prev) {
      for (int prev = 0; prev < nr; ++prev) {
        double acc = 0.0;
        for (int beta = 0; beta < nb; ++beta) {
          const double a = base.transitions(beta_prev, beta);
          if (a > 0.0) acc += a * stage(prev, beta);
        }
        next_future(beta_prev, prev) = acc;
      }
    }
    future = std::move(next_future);
  }

  out.phi_initial.resize(nr, nb);
  out.objective = 0.0;
  for (int beta = 0; beta < nb; ++beta) {
    for (int rho = 0; rho < nr; ++rho) {
      scores[rho] = log_pi_r[rho] + out.state_ell(beta, rho) + future(beta, rho);
    }
    const SoftmaxSolution sol = solve_softmax_log(scores);
    out.phi_initial.col(beta) = sol.probabilities;
    if (base.initial[beta] > 0.0) out.objective += base.initial[beta] * sol.optimum;
  }
  return out;
}

SummaryStats summary_stats(const Hmm& base, const PairEstepResult& pair) {
  const int nr = static_cast<int>(pair.phi_initial.rows());
  const int nb = static_cast<int>(pair.phi_initial.cols());
  const int tau = static_cast<int>(pair.phi_step.size()) + 1;
  if (base.n_states() != nb) throw DimensionMismatchError("E-step result does not belong to this base HMM");

  SummaryStats s;
  s.nu_1.resize(nr, nb);
  for (int gamma = 0; gamma < nb; ++gamma) {
    s.nu_1.col(gamma) = base.initial[gamma] * pair.phi_initial.col(gamma);
  }
  s.nu_t.reserve(static_cast<std::size_t>(tau));
  s.nu_t.push_back(s.nu_1);
  s.nu_agg = s.nu_1;
  s.nu1_agg = s.nu_1.rowwise().sum();
  s.xi_agg = Eigen::MatrixXd::Zero(nr, nr);

  for (int t = 2; t <= tau; ++t) {
    const TransitionPosterior& phi = pair.phi_step[static_cast<std::size_t>(t - 2)];
    // carried(rho, gamma) = sum_beta nu_{t-1}(rho, beta) a^b(beta, gamma)
    const Eigen::MatrixXd carried = s.nu_t.back() * base.transitions;
    Eigen::MatrixXd nu = Eigen::MatrixXd::Zero(nr, nb);
    for (int rho = 0; rho < nr; ++rho) {
      for (int sigma = 0; sigma < nr; ++sigma) {
        double xi_sum = 0.0;
        for (int gamma = 0; gamma < nb; ++gamma) {
          const double xi = carried(rho, gamma) * phi(rho, sigma, gamma);
          nu(sigma, gamma) += xi;
          xi_sum += xi;
        }
        s.xi_agg(rho, sigma) += xi_sum;
      }
    }
    s.nu_agg += nu;
    s.nu_t.push_back(std::move(nu));
  }
  return s;
}

AssignmentMatrix compute_assignments(const Eigen::MatrixXd& objectives,
                                     const Eigen::VectorXd& reduced_weights,
                                     const Eigen::VectorXd& virtual_counts) {
  if (objectives.cols() != reduced_weights.size() || objectives.rows() != virtual_counts.size()) {
    throw DimensionMismatchError("assignment inputs have inconsistent shapes");
  }
  AssignmentMatrix out;
  out.z.resize(objectives.rows(), objectives.cols());
  Eigen::VectorXd scores(objectives.cols());
  for (Eigen::Index i = 0; i < objectives.rows(); ++i) {
    for (Eigen::Index j = 0; j < objectives.cols(); ++j) {
      if (!std::isfinite(objectives(i, j))) {
        throw NumericalError("pair objective is not finite");
      }
      scores[j] = safe_log(reduced_weights[j]) + virtual_counts[i] * objectives(i, j);
    }
    out.z.row(i) = solve_softmax_log(scores).probabilities.transpose();
  }
  return out;
}

double lower_bound(const Eigen::VectorXd& reduced_weights, const AssignmentMatrix& z,
                   const Eigen::MatrixXd& objectives, const Eigen::VectorXd& virtual_counts) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.z.cols(); ++j) {
      const double zij = z.z(i, j);
      if (zij == 0.0) continue;
      total += zij * (safe_log(reduced_weights[j]) - std::log(zij) + virtual_counts[i] * objectives(i, j));
    }
  }
  return total;
}

EstepRound run_estep(const H3m& base, const H3m& reduced, int tau, unsigned threads) {
  EstepRound round;
  round.k_base = base.size();
  round.k_reduced = reduced.size();
  const std::size_t count = static_cast<std::size_t>(round.k_base) * round.k_reduced;
  round.pairs.resize(count);
  round.stats.resize(count);
  parallel_for(count, threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx / round.k_reduced);
    const int j = static_cast<int>(idx % round.k_reduced);
    round.pairs[idx] = estep_pair(base.components[i], reduced.components[j], tau);
    round.stats[idx] = summary_stats(base.components[i], round.pairs[idx]);
  });
  round.objectives.resize(round.k_base, round.k_reduced);
  for (int i = 0; i < round.k_base; ++i) {
    for (int j = 0; j < round.k_reduced; ++j) round.objectives(i, j) = round.pair(i, j).objective;
  }
  return round;
}

MstepResult mstep(const H3m& base, const H3m& previous, const AssignmentMatrix& z,
                  const EstepRound& round, const Eigen::VectorXd& virtual_counts,
                  double cov_floor, double empty_fraction) {
  const int kb = base.size();
  const int kr = previous.size();
  if (z.z.rows() != kb || z.z.cols() != kr || round.k_base != kb || round.k_reduced != kr) {
    throw DimensionMismatchError("M-step inputs come from different model shapes");
  }
  const double n_total = virtual_counts.sum();

  MstepResult out;
  out.model = previous;

  // Mixture weights: w^r_j = sum_i w^b_i z_ij.
  Eigen::VectorXd weight_acc = Eigen::VectorXd::Zero(kr);
  for (int i = 0; i < kb; ++i) {
    for (int j = 0; j < kr; ++j) weight_acc[j] += base.weights[i] * z.z(i, j);
  }
  out.model.weights = solve_weighted_log(weight_acc);

  for (int j = 0; j < kr; ++j) {
    double soft_mass = 0.0;
    for (int i = 0; i < kb; ++i) soft_mass += z.z(i, j) * virtual_counts[i];
    if (soft_mass < empty_fraction * n_total) {
      out.empty_components.push_back(j);
      continue;
    }

    const Hmm& prev = previous.components[j];
    Hmm& next = out.model.components[j];
    const int nr = prev.n_states();
    const int mr = prev.n_mix();
    const int d = prev.dim();

    Eigen::VectorXd init_acc = Eigen::VectorXd::Zero(nr);
    Eigen::MatrixXd trans_acc = Eigen::MatrixXd::Zero(nr, nr);
    Eigen::MatrixXd comp_mass = Eigen::MatrixXd::Zero(nr, mr);
    std::vector<Eigen::VectorXd> mean_acc(static_cast<std::size_t>(nr) * mr, Eigen::VectorXd::Zero(d));

    // Weighted-sum operator: weight of (i, beta, m) for reduced (rho, l) is
    // z_ij N_i nu_agg(rho, beta) c^b_{beta, m} eta_{l|m}.
    auto for_each_weight = [&](auto&& visit) {
      for (int i = 0; i < kb; ++i) {
        const double zn = z.z(i, j) * virtual_counts[i];
        if (zn == 0.0) continue;
        const Hmm& b = base.components[i];
        const SummaryStats& st = round.stat(i, j);
        const PairEstepResult& pr = round.pair(i, j);
        for (int beta = 0; beta < b.n_states(); ++beta) {
          for (int rho = 0; rho < nr; ++rho) {
            const double state_w = zn * st.nu_agg(rho, beta);
            if (state_w == 0.0) continue;
            const EmissionResponsibility& eta = pr.eta_at(beta, rho);
            const GaussianMixture& gb = b.emissions[beta];
            for (int m = 0; m < gb.size(); ++m) {
              const double comp_w = state_w * gb.weights[m];
              if (comp_w == 0.0) continue;
              for (int l = 0; l < mr; ++l) {
                const double w = comp_w * eta.eta(m, l);
                if (w == 0.0) continue;
                visit(rho, l, w, gb.components[m]);
              }
            }
          }
        }
      }
    };

    for (int i = 0; i < kb; ++i) {
      const double zn = z.z(i, j) * virtual_counts[i];
      if (zn == 0.0) continue;
      const SummaryStats& st = round.stat(i, j);
      init_acc += zn * st.nu1_agg;
      trans_acc += zn * st.xi_agg;
    }
    for_each_weight([&](int rho, int l, double w, const Gaussian& g) {
      comp_mass(rho, l) += w;
      mean_acc[static_cast<std::size_t>(rho) * mr + l] += w * g.mean;
    });

    if (init_acc.sum() > 0.0) next.initial = solve_weighted_log(init_acc);
    for (int rho = 0; rho < nr; ++rho) {
      if (trans_acc.row(rho).sum() > 0.0) {
        next.transitions.row(rho) = solve_weighted_log(Eigen::VectorXd(trans_acc.row(rho).transpose())).transpose();
      }
    }

    std::vector<Eigen::VectorXd> means(static_cast<std::size_t>(nr) * mr);
    for (int rho = 0; rho < nr; ++rho) {
      for (int l = 0; l < mr; ++l) {
        const std::size_t idx = static_cast<std::size_t>(rho) * mr + l;
        means[idx] = comp_mass(rho, l) > 0.0 ? Eigen::VectorXd(mean_acc[idx] / comp_mass(rho, l))
                                             : prev.emissions[rho].components[l].mean;
      }
    }
    std::vector<Eigen::MatrixXd> cov_acc(static_cast<std::size_t>(nr) * mr, Eigen::MatrixXd::Zero(d, d));
    for_each_weight([&](int rho, int l, double w, const Gaussian& g) {
      const std::size_t idx = static_cast<std::size_t>(rho) * mr + l;
      const Eigen::VectorXd diff = g.mean - means[idx];
      if (prev.emissions[rho].components[l].type == CovarianceType::Diagonal) {
        cov_acc[idx].diagonal() += w * (g.covariance.diagonal() + diff.cwiseAbs2());
      } else {
        cov_acc[idx] += w * (g.covariance + diff * diff.transpose());
      }
    });

    for (int rho = 0; rho < nr; ++rho) {
      const double state_mass = comp_mass.row(rho).sum();
      if (!(state_mass > 0.0)) continue;
      GaussianMixture& gmm = next.emissions[rho];
      gmm.weights = solve_weighted_log(Eigen::VectorXd(comp_mass.row(rho).transpose()));
      for (int l = 0; l < mr; ++l) {
        if (!(comp_mass(rho, l) > 0.0)) continue;
        const std::size_t idx = static_cast<std::size_t>(rho) * mr + l;
        Gaussian& g = gmm.components[l];
        g.mean = means[idx];
        g.covariance = cov_acc[idx] / comp_mass(rho, l);
        apply_covariance_floor(g, cov_floor);
      }
    }
  }
  return out;
}

Eigen::VectorXd virtual_counts(const H3m& base, double n_virtual) {
  return n_virtual * base.weights;
}

H3m initialize_reduced(const H3m& base, const VhemConfig& config, Rng& rng) {
  const int kb = base.size();
  const int kr = config.k_reduced;
  if (config.init_strategy == InitStrategy::Provided) {
    if (!config.initial_model) throw InitializationError("init strategy 'file' needs an initial model");
    const H3m& init = *config.initial_model;
    if (init.size() != kr) {
      std::ostringstream msg;
      msg << "initial model has " << init.size() << " components, expected " << kr;
      throw InitializationError(msg.str());
    }
    if (init.dim() != base.dim()) throw DimensionMismatchError("initial model dimension differs from base");
    init.validate();
    return init;
  }

  Eigen::VectorXd avail = config.init_strategy == InitStrategy::SubsetPerturb
                              ? Eigen::VectorXd(base.weights)
                              : Eigen::VectorXd::Ones(kb);
  if ((avail.array() > 0.0).count() < kr) {
    throw InitializationError("fewer base components with positive weight than reduced components");
  }
  const double half_width = config.init_strategy == InitStrategy::SubsetPerturb ? 0.01 : 0.1;
  H3m out;
  out.weights = Eigen::VectorXd::Constant(kr, 1.0 / kr);
  for (int j = 0; j < kr; ++j) {
    const int pick = draw_categorical(avail, rng);
    avail[pick] = 0.0;
    Hmm copy = base.components[pick];
    perturb_means(copy, half_width, rng);
    out.components.push_back(std::move(copy));
  }
  return out;
}

std::vector<int> assign_labels(const AssignmentMatrix& z) {
  std::vector<int> labels(static_cast<std::size_t>(z.z.rows()));
  for (Eigen::Index i = 0; i < z.z.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < z.z.cols(); ++j) {
      if (z.z(i, j) > z.z(i, best)) best = static_cast<int>(j);
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

namespace {

ReductionResult reduce_once(const H3m& base, const VhemConfig& config, double n_virtual,
                             std::uint64_t seed) {
  const int kb = base.size();
  Rng rng(seed);
  const Eigen::VectorXd counts = virtual_counts(base, n_virtual);
  const double empty_fraction = 1e-3;
  constexpr int kMaxRescues = 2;

  ReductionResult result;
  H3m reduced = initialize_reduced(base, config, rng);
  bool rescued_last = false;
  EstepRound round;
  for (int it = 0;; ++it) {
    round = run_estep(base, reduced, config.tau_virtual, config.threads);
    result.assignments = compute_assignments(round.objectives, reduced.weights, counts);
    const double bound = lower_bound(reduced.weights, result.assignments, round.objectives, counts);
    if (!std::isfinite(bound)) throw NumericalError("lower bound is not finite");
    result.bound_history.push_back(bound);
    if (it > 0 && !rescued_last) {
      const double prev = result.bound_history[result.bound_history.size() - 2];
      if (std::abs(bound - prev) / std::abs(bound) < config.tol) {
        result.converged = true;
        break;
      }
    }
    if (it >= config.max_iters) break;

    MstepResult next = mstep(base, reduced, result.assignments, round, counts,
                             config.cov_floor, empty_fraction);
    rescued_last = false;
    for (int j : next.empty_components) {
      if (static_cast<int>(result.rescue_iterations.size()) >= kMaxRescues) break;
      // Re-seed from the base component explained worst by its current assignment.
      int worst = 0;
      double worst_value = 0.0;
      for (int i = 0; i < kb; ++i) {
        const double value = result.assignments.z.row(i).dot(round.objectives.row(i));
        if (i == 0 || value < worst_value) {
          worst = i;
          worst_value = value;
        }
      }
      const Hmm& source = base.components[worst];
      const Hmm& empty = next.model.components[j];
      if (source.n_states() == empty.n_states() && source.n_mix() == empty.n_mix()) {
        next.model.components[j] = source;
      } else {
        // Shapes differ (provided init): fit the empty component to the
        // source alone with one single-cluster E/M step.
        const H3m single = H3m::uniform({source});
        const H3m current = H3m::uniform({empty});
        const EstepRound solo = run_estep(single, current, config.tau_virtual, 1);
        const AssignmentMatrix hard{Eigen::MatrixXd::Ones(1, 1)};
        next.model.components[j] =
            mstep(single, current, hard, solo, Eigen::VectorXd::Constant(1, n_virtual), config.cov_floor)
                .model.components[0];
      }
      next.model.weights[j] = std::max(next.model.weights[j], base.weights[worst]);
      next.model.weights = solve_weighted_log(next.model.weights);
      result.rescue_iterations.push_back(it);
      rescued_last = true;
    }
    reduced = std::move(next.model);
    result.iterations = it + 1;
  }

  result.reduced = std::move(reduced);
  result.objectives = round.objectives;
  result.hard_labels = assign_labels(result.assignments);
  result.effective_k = 0;
  for (int j = 0; j < config.k_reduced; ++j) {
    if (result.assignments.z.col(j).dot(counts) >= empty_fraction * n_virtual) ++result.effective_k;
  }
  return result;
}

}  // namespace

ReductionResult vhem_reduce(const H3m& base, const VhemConfig& config) {
  base.validate();
  const int kb = base.size();
  if (config.k_reduced < 1 || config.k_reduced > kb) {
    std::ostringstream msg;
    msg << "k_reduced must lie in [1, " << kb << "], got " << config.k_reduced;
    throw ValidationError(msg.str());
  }
  if (config.tau_virtual < 1) throw ValidationError("tau_virtual must be >= 1");
  if (config.max_iters < 0) throw ValidationError("max_iters must be >= 0");
  const double n_virtual = config.n_virtual > 0.0 ? config.n_virtual : 1e4 * kb;
  if (n_virtual < 1.0) throw ValidationError("n_virtual must be >= 1");

  if (config.restarts < 1) throw ValidationError("restarts must be >= 1");
  const int starts = config.init_strategy == InitStrategy::Provided ? 1 : config.restarts;

  ReductionResult best;
  std::vector<double> finals;
  for (int r = 0; r < starts; ++r) {
    const std::uint64_t seed = r == 0 ? config.seed : derive_seed(config.seed, static_cast<std::uint64_t>(r));
    ReductionResult run = reduce_once(base, config, n_virtual, seed);
    finals.push_back(run.bound_history.back());
    if (r == 0 || finals.back() > best.bound_history.back()) {
      best = std::move(run);
      best.selected_restart = r;
    }
  }
  best.restart_bounds = std::move(finals);
  return best;
}

}  // namespace vhem
