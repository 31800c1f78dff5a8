#include "vhem/synth.hpp"

#include <string>

#include "vhem/errors.hpp"

namespace vhem {

namespace {

Hmm prototype(double offset, const SynthStructure& s) {
  const int n = s.n_states;
  const int d = s.dim;
  Hmm h;
  h.initial = Eigen::VectorXd::Constant(n, 1.0 / n);
  if (n == 1) {
    h.transitions = Eigen::MatrixXd::Ones(1, 1);
  } else {
    h.transitions = Eigen::MatrixXd::Constant(n, n, (1.0 - s.self_transition) / (n - 1));
    h.transitions.diagonal().setConstant(s.self_transition);
  }
  for (int st = 0; st < n; ++st) {
    const double state_pos = n == 1 ? 0.0 : s.state_spread * (2.0 * st / (n - 1) - 1.0);
    GaussianMixture gmm;
    gmm.weights = Eigen::VectorXd::Constant(s.n_mix, 1.0 / s.n_mix);
    for (int m = 0; m < s.n_mix; ++m) {
      const double comp_pos = 0.5 * (m - 0.5 * (s.n_mix - 1));
      gmm.components.emplace_back(Eigen::VectorXd::Constant(d, offset + state_pos + comp_pos),
                                  s.emission_var * Eigen::MatrixXd::Identity(d, d), s.cov_type);
    }
    h.emissions.push_back(std::move(gmm));
  }
  return h;
}

}  // namespace

SynthBenchmark synth_benchmark(int n_groups, int per_group, double separation,
                               const SynthStructure& structure, Rng& rng) {
  if (n_groups < 2) throw ValidationError("synthetic benchmark needs at least 2 groups");
  if (per_group < 1) throw ValidationError("per_group must be >= 1");
  if (structure.n_states < 1 || structure.n_mix < 1 || structure.dim < 1) {
    throw ValidationError("synthetic structure needs n_states, n_mix, dim >= 1");
  }
  SynthBenchmark out;
  std::normal_distribution<double> noise(0.0, separation / 20.0);
  for (int g = 0; g < n_groups; ++g) {
    const double offset = (g - 0.5 * (n_groups - 1)) * separation;
    out.prototypes.push_back(prototype(offset, structure));
  }
  for (int g = 0; g < n_groups; ++g) {
    for (int k = 0; k < per_group; ++k) {
      Hmm member = out.prototypes[g];
      for (auto& gmm : member.emissions) {
        for (auto& comp : gmm.components) {
          for (Eigen::Index c = 0; c < comp.mean.size(); ++c) {
            if (separation > 0.0) comp.mean[c] += noise(rng);
          }
        }
      }
      const double lambda = structure.transition_jitter;
      for (int r = 0; r < member.n_states(); ++r) {
        const Eigen::VectorXd jitter = draw_dirichlet(member.n_states(), 1.0, rng);
        member.transitions.row(r) = ((1.0 - lambda) * member.transitions.row(r).transpose() + lambda * jitter).transpose();
        member.transitions.row(r) /= member.transitions.row(r).sum();
      }
      out.models.push_back(std::move(member));
      out.labels.push_back(g);
    }
  }
  return out;
}

LabeledDataset sample_dataset(const std::vector<Hmm>& models, const std::vector<int>& labels,
                              int per_model, int tau, Rng& rng) {
  if (models.size() != labels.size()) throw ValidationError("one label per model is required");
  LabeledDataset out;
  for (std::size_t k = 0; k < models.size(); ++k) {
    for (int n = 0; n < per_model; ++n) {
      Sequence seq = sample(models[k], tau, rng).sequence;
      seq.id = "m" + std::to_string(k) + "_s" + std::to_string(n);
      seq.label = std::to_string(labels[k]);
      out.sequences.push_back(std::move(seq));
      out.labels.push_back(labels[k]);
    }
  }
  return out;
}

std::vector<Hmm> two_population_models() {
  SynthStructure s;
  s.n_states = 2;
  s.state_spread = 1.0;
  s.self_transition = 0.8;
  return {prototype(-5.0, s), prototype(5.0, s)};
}

LabeledDataset two_population_dataset(int per_population, int tau, Rng& rng) {
  return sample_dataset(two_population_models(), {0, 1}, per_population, tau, rng);
}

}  // namespace vhem
