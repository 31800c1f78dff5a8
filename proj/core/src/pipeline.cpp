#include "vhem/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "vhem/errors.hpp"
#include "vhem/parallel.hpp"

namespace vhem {

SplitResult split_estimate_aggregate(const std::vector<Sequence>& data, const SplitConfig& config) {
  if (config.n_portions < 1) throw ValidationError("n_portions must be >= 1");
  if (config.per_portion_k < 1 || config.final_k < 1) throw ValidationError("component counts must be >= 1");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  if (config.n_portions > 1) {
    Rng shuffle_rng(derive_seed(config.seed, 0xFFFF));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
  }

  const std::size_t n_portions = static_cast<std::size_t>(config.n_portions);
  std::vector<std::vector<Sequence>> portions(n_portions);
  for (std::size_t p = 0; p < n_portions; ++p) {
    const std::size_t begin = p * data.size() / n_portions;
    const std::size_t end = (p + 1) * data.size() / n_portions;
    for (std::size_t k = begin; k < end; ++k) portions[p].push_back(data[order[k]]);
    if (static_cast<int>(portions[p].size()) < config.per_portion_k) {
      std::ostringstream msg;
      msg << "portion " << p << " has " << portions[p].size() << " sequences, fewer than the "
          << config.per_portion_k << " components requested per portion";
      throw ValidationError(msg.str());
    }
  }

  std::vector<H3mFit> fits(n_portions);
  parallel_for(n_portions, config.threads, [&](std::size_t p) {
    Rng rng(derive_seed(config.seed, p));
    fits[p] = h3m_em(portions[p], config.per_portion_k, config.n_states, config.n_mix, config.em, rng);
  });

  SplitResult result;
  std::vector<double> pooled_weights;
  for (std::size_t p = 0; p < n_portions; ++p) {
    PortionReport report;
    report.n_sequences = portions[p].size();
    report.loglik = fits[p].loglik_trace.back();
    report.iterations = fits[p].iterations;
    result.portions.push_back(report);
    for (int k = 0; k < fits[p].model.size(); ++k) {
      pooled_weights.push_back(static_cast<double>(portions[p].size()) * fits[p].model.weights[k]);
      result.pooled.components.push_back(fits[p].model.components[k]);
    }
  }
  result.pooled.weights = solve_weighted_log(std::span<const double>(pooled_weights));

  VhemConfig vcfg = config.vhem;
  vcfg.k_reduced = config.final_k;
  result.reduction = vhem_reduce(result.pooled, vcfg);
  result.model = result.reduction.reduced;
  return result;
}

}  // namespace vhem
