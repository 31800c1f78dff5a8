#pragma once

#include <vector>

#include "vhem/engine.hpp"
#include "vhem/h3m.hpp"

namespace vhem {

/// One level of an HMM hierarchy. Level 0 holds the leaves; parent_of maps
/// each component of the previous level to its cluster at this level.
struct HierarchyLevel {
  H3m models;
  std::vector<int> parent_of;        // empty at level 0
  int size = 0;                      // K at this level
  std::vector<double> bound_history; // of the reduction that produced this level
};

/// Builds levels by repeatedly reducing the previous level with VHEM,
/// using the cluster centers as the next level's HMMs. `config` supplies
/// everything but k_reduced; each level uses seed config.seed + level.
std::vector<HierarchyLevel> hier_cluster(const std::vector<Hmm>& leaves,
                                         const std::vector<int>& ladder,
                                         const VhemConfig& config);

/// Cluster index of every leaf at `level`, composing parent_of maps.
std::vector<int> leaf_labels(const std::vector<HierarchyLevel>& levels, int level);

/// Fraction of unordered item pairs on which two labelings agree
/// (both same-cluster or both different-cluster).
double rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

/// Best accuracy of `predicted` against `truth` over one-to-one matchings of
/// predicted clusters to true classes.
double matched_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace vhem
