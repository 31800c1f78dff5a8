#include "vhem/hierarchy.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "vhem/errors.hpp"

namespace vhem {

std::vector<HierarchyLevel> hier_cluster(const std::vector<Hmm>& leaves,
                                         const std::vector<int>& ladder,
                                         const VhemConfig& config) {
  if (leaves.empty()) throw ValidationError("hierarchy needs at least one leaf");
  if (ladder.empty()) throw ValidationError("hierarchy ladder is empty");
  if (ladder.front() > static_cast<int>(leaves.size()) || ladder.front() < 1) {
    throw ValidationError("first ladder entry must lie in [1, number of leaves]");
  }
  for (std::size_t l = 1; l < ladder.size(); ++l) {
    if (ladder[l] >= ladder[l - 1] || ladder[l] < 1) {
      throw ValidationError("hierarchy ladder must be strictly decreasing and positive");
    }
  }

  std::vector<HierarchyLevel> levels;
  HierarchyLevel root;
  root.models = H3m::uniform(leaves);
  root.size = static_cast<int>(leaves.size());
  levels.push_back(std::move(root));

  for (std::size_t l = 0; l < ladder.size(); ++l) {
    VhemConfig cfg = config;
    cfg.k_reduced = ladder[l];
    cfg.seed = config.seed + l + 1;
    cfg.init_strategy = config.init_strategy == InitStrategy::Provided ? InitStrategy::SubsetPerturb
                                                                       : config.init_strategy;
    cfg.initial_model.reset();
    ReductionResult r = vhem_reduce(levels.back().models, cfg);
    HierarchyLevel level;
    level.models = std::move(r.reduced);
    level.parent_of = std::move(r.hard_labels);
    level.size = ladder[l];
    level.bound_history = std::move(r.bound_history);
    levels.push_back(std::move(level));
  }
  return levels;
}

std::vector<int> leaf_labels(const std::vector<HierarchyLevel>& levels, int level) {
  if (level < 0 || level >= static_cast<int>(levels.size())) {
    throw ValidationError("hierarchy level out of range");
  }
  std::vector<int> labels(static_cast<std::size_t>(levels.front().size));
  std::iota(labels.begin(), labels.end(), 0);
  for (int l = 1; l <= level; ++l) {
    for (int& label : labels) label = levels[l].parent_of.at(static_cast<std::size_t>(label));
  }
  return labels;
}

double rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) {
    std::ostringstream msg;
    msg << "label lists differ in length (" << labels_a.size() << " vs " << labels_b.size() << ")";
    throw ValidationError(msg.str());
  }
  const std::size_t n = labels_a.size();
  if (n < 2) throw ValidationError("rand index needs at least two items");
  std::size_t agree = 0;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const bool same_a = labels_a[p] == labels_a[q];
      const bool same_b = labels_b[p] == labels_b[q];
      if (same_a == same_b) ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(n * (n - 1) / 2);
}

double matched_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw ValidationError("label lists must be nonempty and of equal length");
  }
  const int kp = *std::max_element(predicted.begin(), predicted.end()) + 1;
  const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
  if (std::min(kp, kt) > 8) throw ValidationError("matched accuracy supports at most 8 clusters");
  std::vector<std::vector<int>> counts(kp, std::vector<int>(kt, 0));
  for (std::size_t n = 0; n < predicted.size(); ++n) ++counts[predicted[n]][truth[n]];
  // Enumerate injective maps from the smaller side into the larger one.
  const bool pred_small = kp <= kt;
  const int small = pred_small ? kp : kt;
  const int large = pred_small ? kt : kp;
  std::vector<int> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int hits = 0;
    for (int s = 0; s < small; ++s) hits += pred_small ? counts[s][perm[s]] : counts[perm[s]][s];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(predicted.size());
}

}  // namespace vhem
