#include "vhem/random.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "vhem/errors.hpp"

namespace vhem {

int draw_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng) {
  const double total = probs.sum();
  if (!(total > 0.0)) throw DegenerateWeightsError("cannot sample from all-zero weights");
  std::uniform_real_distribution<double> unif(0.0, total);
  const double u = unif(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = static_cast<int>(k);
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return last_positive;
}

Eigen::VectorXd draw_dirichlet(int n, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Eigen::VectorXd out(n);
  for (int k = 0; k < n; ++k) out[k] = gamma(rng);
  const double total = out.sum();
  if (!(total > 0.0)) return Eigen::VectorXd::Constant(n, 1.0 / n);
  return out / total;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, int max_iters) {
  const Eigen::Index n = points.rows();
  if (k < 1 || n < 1) throw EstimationError("k-means needs k >= 1 and at least one point");
  KMeansResult out;
  out.centers.resize(k, points.cols());
  out.labels.assign(static_cast<std::size_t>(n), 0);

  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  out.centers.row(0) = points.row(pick(rng));
  Eigen::VectorXd dist2 = (points.rowwise() - out.centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    Eigen::Index chosen = dist2.sum() > 0.0 ? draw_categorical(dist2, rng) : pick(rng);
    out.centers.row(c) = points.row(chosen);
    dist2 = dist2.cwiseMin((points.rowwise() - out.centers.row(c)).rowwise().squaredNorm());
  }

  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (Eigen::Index r = 0; r < n; ++r) {
      Eigen::Index best = 0;
      (out.centers.rowwise() - points.row(r)).rowwise().squaredNorm().minCoeff(&best);
      changed = changed || out.labels[r] != static_cast<int>(best);
      out.labels[r] = static_cast<int>(best);
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index r = 0; r < n; ++r) {
      sums.row(out.labels[r]) += points.row(r);
      counts[out.labels[r]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) out.centers.row(c) = sums.row(c) / counts[c];
    }
    if (!changed && it > 0) break;
  }
  return out;
}

Eigen::Index count_distinct_rows(const Eigen::MatrixXd& points) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    rows[r].resize(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index c = 0; c < points.cols(); ++c) rows[r][c] = points(r, c);
  }
  std::sort(rows.begin(), rows.end());
  return static_cast<Eigen::Index>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

}  // namespace vhem
