#pragma once

// Variational hierarchical EM for mixtures of HMMs: reduces a base H3M with
// K^b components to a reduced H3M with K^r components whose members act as
// cluster centers for groups of base HMMs.
//
// Index conventions used throughout: i / j index base / reduced components,
// beta / gamma index base-model states, rho / sigma index reduced-model
// states, m / l index base / reduced emission mixture components.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vhem/gaussian.hpp"
#include "vhem/h3m.hpp"
#include "vhem/hmm.hpp"

namespace vhem {

enum class InitStrategy { SubsetPerturb, Random, Provided };

const char* to_string(InitStrategy strategy);
InitStrategy init_strategy_from_string(const std::string& name);

struct VhemConfig {
  double n_virtual = 0.0;   // total virtual sample mass N; <= 0 selects 1e4 * K^b
  int tau_virtual = 10;     // length of the virtual sequences
  int k_reduced = 1;
  int max_iters = 100;
  double tol = 1e-6;        // stop when |dJ| / |J| < tol
  InitStrategy init_strategy = InitStrategy::SubsetPerturb;
  double cov_floor = kDefaultCovFloor;
  std::uint64_t seed = 0;
  unsigned threads = 1;     // E-step workers; 0 = hardware concurrency
  int restarts = 1;         // independent starts; the one with the highest final bound is kept
  std::optional<H3m> initial_model;  // required by InitStrategy::Provided
};

/// phi_t(rho_prev, rho, beta) for one time step t >= 2; sums to one over rho.
class TransitionPosterior {
 public:
  TransitionPosterior() = default;
  TransitionPosterior(int n_reduced, int n_base)
      : n_reduced_(n_reduced), n_base_(n_base),
        values_(static_cast<std::size_t>(n_reduced) * n_reduced * n_base, 0.0) {}

  double operator()(int rho_prev, int rho, int beta) const { return values_[index(rho_prev, rho, beta)]; }
  double& operator()(int rho_prev, int rho, int beta) { return values_[index(rho_prev, rho, beta)]; }

  int n_reduced() const { return n_reduced_; }
  int n_base() const { return n_base_; }

 private:
  std::size_t index(int rho_prev, int rho, int beta) const {
    return (static_cast<std::size_t>(rho_prev) * n_reduced_ + rho) * n_base_ + beta;
  }
  int n_reduced_ = 0;
  int n_base_ = 0;
  std::vector<double> values_;
};

/// Variational quantities for one (base i, reduced j) pair.
struct PairEstepResult {
  std::vector<EmissionResponsibility> eta;  // indexed beta * N^r + rho
  Eigen::MatrixXd phi_initial;              // N^r x N^b, columns sum to one
  std::vector<TransitionPosterior> phi_step;  // entry k holds t = k + 2
  Eigen::MatrixXd state_ell;                // N^b x N^r, L(base beta || reduced rho)
  double objective = 0.0;                   // lower bound on E_base[log p(y | reduced)]

  const EmissionResponsibility& eta_at(int beta, int rho) const {
    return eta[static_cast<std::size_t>(beta) * phi_initial.rows() + rho];
  }
};

/// Expected occupancy / transition counts of the reduced model when it
/// explains sequences of the base model.
struct SummaryStats {
  Eigen::MatrixXd nu_1;     // N^r x N^b
  Eigen::MatrixXd nu_agg;   // N^r x N^b, summed over t
  Eigen::VectorXd nu1_agg;  // N^r
  Eigen::MatrixXd xi_agg;   // N^r x N^r
  std::vector<Eigen::MatrixXd> nu_t;  // per t, N^r x N^b
};

struct AssignmentMatrix {
  Eigen::MatrixXd z;  // K^b x K^r, row-stochastic
};

struct ReductionResult {
  H3m reduced;
  AssignmentMatrix assignments;
  std::vector<double> bound_history;
  std::vector<int> hard_labels;         // base component -> reduced component
  std::vector<int> rescue_iterations;   // iterations after which a component was re-seeded
  Eigen::MatrixXd objectives;           // K^b x K^r pair objectives of the final E-step
  int effective_k = 0;
  int iterations = 0;
  bool converged = false;
  int selected_restart = 0;
  std::vector<double> restart_bounds;   // final bound of every start
};

/// Closed-form variational E-step for one pair: optimal eta per state pair,
/// the state-level bound matrix, and the backward recursion for phi.
PairEstepResult estep_pair(const Hmm& base, const Hmm& reduced, int tau);

SummaryStats summary_stats(const Hmm& base, const PairEstepResult& pair);

/// z_ij proportional to w_j exp(N_i J_ij), evaluated in log domain.
AssignmentMatrix compute_assignments(const Eigen::MatrixXd& objectives,
                                     const Eigen::VectorXd& reduced_weights,
                                     const Eigen::VectorXd& virtual_counts);

/// All pair E-steps and summary statistics of one iteration.
struct EstepRound {
  int k_base = 0;
  int k_reduced = 0;
  std::vector<PairEstepResult> pairs;  // row-major in (i, j)
  std::vector<SummaryStats> stats;
  Eigen::MatrixXd objectives;          // K^b x K^r

  const PairEstepResult& pair(int i, int j) const { return pairs[static_cast<std::size_t>(i) * k_reduced + j]; }
  const SummaryStats& stat(int i, int j) const { return stats[static_cast<std::size_t>(i) * k_reduced + j]; }
};

EstepRound run_estep(const H3m& base, const H3m& reduced, int tau, unsigned threads = 1);

struct MstepResult {
  H3m model;
  std::vector<int> empty_components;  // kept at their previous parameters
};

/// Maximizes the bound over the reduced parameters for fixed (z, phi, eta).
/// Components whose soft mass sum_i z_ij N_i falls below empty_fraction * N
/// keep their previous parameters and are reported.
MstepResult mstep(const H3m& base, const H3m& previous, const AssignmentMatrix& z,
                  const EstepRound& round, const Eigen::VectorXd& virtual_counts,
                  double cov_floor, double empty_fraction = 1e-3);

/// sum_ij z_ij [log w_j - log z_ij + N_i J_ij], with 0 log 0 = 0.
double lower_bound(const Eigen::VectorXd& reduced_weights, const AssignmentMatrix& z,
                   const Eigen::MatrixXd& objectives, const Eigen::VectorXd& virtual_counts);

/// N_i = N * w^b_i.
Eigen::VectorXd virtual_counts(const H3m& base, double n_virtual);

/// Initial reduced model according to config.init_strategy.
H3m initialize_reduced(const H3m& base, const VhemConfig& config, Rng& rng);

/// Alternates E- and M-steps until the relative bound change drops below
/// config.tol or config.max_iters M-steps have run. With restarts > 1 the
/// first start uses config.seed, start r uses derive_seed(config.seed, r), and
/// the run reaching the highest final bound is returned.
ReductionResult vhem_reduce(const H3m& base, const VhemConfig& config);

/// Row argmax with ties resolved to the lowest index.
std::vector<int> assign_labels(const AssignmentMatrix& z);

}  // namespace vhem
