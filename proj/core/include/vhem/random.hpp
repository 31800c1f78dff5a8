#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace vhem {

using Rng = std::mt19937_64;

/// Index drawn with probability proportional to `probs` (need not be
/// normalized). Inverse-CDF on a single uniform draw.
int draw_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng);

/// Symmetric Dirichlet(alpha) sample of length n.
Eigen::VectorXd draw_dirichlet(int n, double alpha, Rng& rng);

/// Derives an independent child seed from (seed, stream) with splitmix64 so
/// parallel workers do not share generator state.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct KMeansResult {
  Eigen::MatrixXd centers;  // k x d
  std::vector<int> labels;  // per input row
};

/// k-means++ seeding followed by Lloyd iterations on the rows of `points`.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, int max_iters = 25);

/// Number of distinct rows (exact comparison).
Eigen::Index count_distinct_rows(const Eigen::MatrixXd& points);

}  // namespace vhem
