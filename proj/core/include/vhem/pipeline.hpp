#pragma once

#include <cstdint>
#include <vector>

#include "vhem/engine.hpp"
#include "vhem/h3m.hpp"

namespace vhem {

struct SplitConfig {
  int n_portions = 4;
  int per_portion_k = 2;
  int final_k = 2;
  int n_states = 2;
  int n_mix = 1;
  EmConfig em;
  VhemConfig vhem;          // k_reduced is taken from final_k
  std::uint64_t seed = 0;   // portion p uses derive_seed(seed, p)
  unsigned threads = 1;     // portions run on independent workers
};

struct PortionReport {
  std::size_t n_sequences = 0;
  double loglik = 0.0;
  int iterations = 0;
};

struct SplitResult {
  H3m model;
  H3m pooled;
  std::vector<PortionReport> portions;
  ReductionResult reduction;
};

/// Splits `data` into n_portions disjoint portions (seeded shuffle when
/// n_portions > 1), fits an H3M to each with h3m_em, pools the intermediate
/// components with weights proportional to portion size times component
/// weight, and reduces the pool to final_k components with VHEM.
SplitResult split_estimate_aggregate(const std::vector<Sequence>& data, const SplitConfig& config);

}  // namespace vhem
