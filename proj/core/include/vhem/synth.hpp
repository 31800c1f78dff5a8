#pragma once

#include <vector>

#include "vhem/hmm.hpp"

namespace vhem {

struct SynthStructure {
  int n_states = 2;
  int n_mix = 1;
  int dim = 1;
  int tau = 20;              // length of sampled sequences
  double state_spread = 1.0; // state means sit at offset +/- state_spread
  double emission_var = 1.0;
  double self_transition = 0.8;
  double transition_jitter = 0.1;  // weight of the Dirichlet draw mixed into member rows
  CovarianceType cov_type = CovarianceType::Diagonal;
};

struct SynthBenchmark {
  std::vector<Hmm> prototypes;  // one per group
  std::vector<Hmm> models;      // n_groups * per_group members, grouped contiguously
  std::vector<int> labels;      // group of each member
};

/// Group g's prototype has emission means offset by (g - (G-1)/2) * separation
/// along every coordinate; members perturb the prototype means with
/// N(0, (separation/20)^2) noise and mix a Dirichlet draw into each
/// transition row.
SynthBenchmark synth_benchmark(int n_groups, int per_group, double separation,
                               const SynthStructure& structure, Rng& rng);

struct LabeledDataset {
  std::vector<Sequence> sequences;
  std::vector<int> labels;
};

/// per_model sequences of length tau from each model, labelled by `labels`.
LabeledDataset sample_dataset(const std::vector<Hmm>& models, const std::vector<int>& labels,
                              int per_model, int tau, Rng& rng);

/// Two populations of 2-state, unit-variance HMMs centred at -5 and +5.
std::vector<Hmm> two_population_models();
LabeledDataset two_population_dataset(int per_population, int tau, Rng& rng);

}  // namespace vhem
