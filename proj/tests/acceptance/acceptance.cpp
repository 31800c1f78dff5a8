// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vhem/engine.hpp"
#include "vhem/hierarchy.hpp"
#include "vhem/parallel.hpp"
#include "vhem/pipeline.hpp"
#include "vhem/synth.hpp"

using namespace vhem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& p) {
  std::vector<int> out;
  for (Eigen::Index n = 0; n < p.rows(); ++n) {
    Eigen::Index best = 0;
    p.row(n).maxCoeff(&best);
    out.push_back(static_cast<int>(best));
  }
  return out;
}

bool trace_monotone(const std::vector<double>& trace, double rel, double* worst = nullptr) {
  bool ok = true;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const double delta = trace[k] - trace[k - 1];
    const double scaled = delta / std::abs(trace[k]);
    if (worst && scaled < *worst) *worst = scaled;
    if (delta < -rel * std::abs(trace[k])) ok = false;
  }
  return ok;
}

Hmm random_model(int n, int m, int d, Rng& rng) {
  oracle::RandomHmmSpec spec;
  spec.n_states = n;
  spec.n_mix = m;
  spec.dim = d;
  spec.cov_type = (rng() & 1) ? CovarianceType::Full : CovarianceType::Diagonal;
  return oracle::random_hmm(spec, rng);
}

// Every stochastic vector and covariance diagonal of a model, for criterion 7.
struct ValidityTally {
  double worst_sum_error = 0.0;
  double min_cov_diag = INFINITY;
  double min_entry = INFINITY;

  void add_vector(const Eigen::VectorXd& v) {
    worst_sum_error = std::max(worst_sum_error, std::abs(v.sum() - 1.0));
    min_entry = std::min(min_entry, v.minCoeff());
  }
  void add(const H3m& m) {
    add_vector(m.weights);
    for (const auto& h : m.components) {
      add_vector(h.initial);
      for (int s = 0; s < h.n_states(); ++s) add_vector(h.transitions.row(s).transpose());
      for (const auto& e : h.emissions) {
        add_vector(e.weights);
        for (const auto& g : e.components) min_cov_diag = std::min(min_cov_diag, g.covariance.diagonal().minCoeff());
      }
    }
  }
};

Outcome criterion1() {
  Rng rng(1001);
  double worst = 0.0;
  double worst_second = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::uniform_int_distribution<int> two(1, 2);
    std::uniform_int_distribution<int> three(1, 3);
    const int d = two(rng);
    const Hmm b = random_model(two(rng), two(rng), d, rng);
    const Hmm r = random_model(two(rng), two(rng), d, rng);
    const int tau = three(rng);
    const auto res = estep_pair(b, r, tau);
    worst = std::max(worst, std::abs(res.objective - oracle::elhmm_bruteforce(b, r, tau)));
    oracle::FactoredPosterior phi;
    phi.initial = [&res](int rho, int beta) { return res.phi_initial(rho, beta); };
    phi.step = [&res](int t, int prev, int rho, int beta) { return res.phi_step[t - 2](prev, rho, beta); };
    worst_second = std::max(worst_second, std::abs(res.objective - oracle::elhmm_evaluate(b, r, tau, phi)));
  }
  return {worst <= 1e-9 && worst_second <= 1e-9,
          fmt("100 pairs, max |objective - bruteforce| = %.3g, max |objective - enumeration at phi| = %.3g (tol 1e-9)",
              worst, worst_second)};
}

Outcome criterion2() {
  const int n_pairs = 50;
  std::vector<int> ok(n_pairs, 0);
  std::vector<double> margin(n_pairs, 0.0);
  parallel_for(n_pairs, 0, [&](std::size_t p) {
    Rng rng(derive_seed(2002, p));
    std::uniform_int_distribution<int> states(1, 3);
    std::uniform_int_distribution<int> mix(1, 2);
    const Hmm b = random_model(states(rng), mix(rng), 1 + static_cast<int>(p % 2), rng);
    const Hmm r = random_model(states(rng), mix(rng), b.dim(), rng);
    const double bound = estep_pair(b, r, 5).objective;
    const auto mc = mc_expected_loglik(b, r, 5, 100000, rng);
    margin[p] = (mc.mean + 3 * mc.stderr_mean - bound);
    ok[p] = bound <= mc.mean + 3 * mc.stderr_mean;
  });
  int count = 0;
  for (int v : ok) count += v;
  double tightest = margin[0];
  for (double m : margin) tightest = std::min(tightest, m);
  return {count >= 49, fmt("%d/50 pairs with objective <= MC mean + 3 stderr (need 49), smallest margin %.4g",
                           count, tightest)};
}

Outcome criterion3() {
  Rng rng(3003);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    std::uniform_int_distribution<int> dims(1, 3);
    std::uniform_int_distribution<int> taus(1, 12);
    const int d = dims(rng);
    const Hmm b = random_model(1, 1, d, rng);
    const Hmm r = random_model(1, 1, d, rng);
    const int tau = taus(rng);
    const double expected = tau * gauss_expected_loglik(b.emissions[0].components[0], r.emissions[0].components[0]);
    worst = std::max(worst, std::abs(estep_pair(b, r, tau).objective - expected));
  }
  return {worst <= 1e-10, fmt("20 Gaussian pairs, max |objective - tau * L_G| = %.3g (tol 1e-10)", worst)};
}

struct ReductionRecord {
  std::vector<double> bounds;
  std::vector<int> labels;
  std::vector<int> rescues;
};

// Criterion 4 workload: 20 seeded reductions of a 20-component base.
std::vector<ReductionRecord> monotonicity_runs(ValidityTally* tally) {
  std::vector<ReductionRecord> out;
  for (int run = 0; run < 20; ++run) {
    Rng rng(derive_seed(4004, run));
    SynthStructure st;
    st.n_mix = 1 + run % 2;
    const auto bench = synth_benchmark(4, 5, 2.0 + 0.2 * run, st, rng);
    VhemConfig cfg;
    cfg.k_reduced = run % 2 == 0 ? 2 : 4;
    cfg.seed = derive_seed(4005, run);
    const auto res = vhem_reduce(H3m::uniform(bench.models), cfg);
    if (tally) tally->add(res.reduced);
    out.push_back({res.bound_history, res.hard_labels, res.rescue_iterations});
  }
  return out;
}

Outcome criterion4(const std::vector<ReductionRecord>& runs) {
  int failures = 0;
  int rescued = 0;
  double worst = 0.0;
  for (const auto& r : runs) {
    failures += !trace_monotone(r.bounds, 1e-8, &worst);
    rescued += !r.rescues.empty();
  }
  return {failures == 0, fmt("%d/20 runs with a bound decrease beyond 1e-8 |J|; worst relative delta %.3g; "
                             "%d runs re-seeded an empty component",
                             failures, worst, rescued)};
}

struct RecoveryRecord {
  ReductionRecord flat;
  std::vector<double> ladder_bounds;
  std::vector<int> top_labels;
  double rand = 0.0;
  double single_start_rand = 0.0;
  bool ladder_ok = false;
};

std::vector<RecoveryRecord> recovery_runs(ValidityTally* tally) {
  std::vector<RecoveryRecord> out;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(5005, seed));
    const auto bench = synth_benchmark(4, 5, 4.0, SynthStructure{}, rng);
    VhemConfig cfg;
    cfg.k_reduced = 4;
    cfg.seed = derive_seed(5006, seed);
    RecoveryRecord rec;
    rec.single_start_rand = rand_index(vhem_reduce(H3m::uniform(bench.models), cfg).hard_labels, bench.labels);
    // best final bound over 5 seeded starts; selection never looks at labels
    cfg.restarts = 5;
    const auto res = vhem_reduce(H3m::uniform(bench.models), cfg);
    rec.flat = {res.bound_history, res.hard_labels, res.rescue_iterations};
    rec.rand = rand_index(res.hard_labels, bench.labels);
    if (tally) tally->add(res.reduced);

    const auto levels = hier_cluster(bench.models, {4, 2}, cfg);
    for (const auto& level : levels) {
      rec.ladder_bounds.insert(rec.ladder_bounds.end(), level.bound_history.begin(), level.bound_history.end());
      if (tally && level.parent_of.size() > 0) tally->add(level.models);
    }
    rec.top_labels = leaf_labels(levels, 2);
    // groups 0,1 (and 2,3) have the nearest prototypes
    std::vector<int> expected(bench.labels.size());
    for (std::size_t i = 0; i < expected.size(); ++i) expected[i] = bench.labels[i] / 2;
    rec.ladder_ok = rand_index(rec.top_labels, expected) == 1.0;
    out.push_back(std::move(rec));
  }
  return out;
}

Outcome criterion5(const std::vector<RecoveryRecord>& runs) {
  int flat = 0;
  int single = 0;
  int ladder = 0;
  double lowest = 1.0;
  for (const auto& r : runs) {
    flat += r.rand >= 0.95;
    single += r.single_start_rand >= 0.95;
    ladder += r.ladder_ok;
    lowest = std::min(lowest, r.rand);
  }
  return {flat >= 9 && ladder >= 8,
          fmt("Rand >= 0.95 at K=4 in %d/10 seeds (need 9, lowest %.3f; single start %d/10); "
              "ladder [4,2] pairs {0,1},{2,3} in %d/10 (need 8); 5 restarts",
              flat, lowest, single, ladder)};
}

Outcome criterion6() {
  Rng rng(6006);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::uniform_int_distribution<int> states(1, 3);
    std::uniform_int_distribution<int> taus(1, 8);
    const Hmm b = random_model(states(rng), 1 + rep % 2, 1, rng);
    const Hmm r = random_model(states(rng), 1 + (rep / 2) % 2, 1, rng);
    const int tau = taus(rng);
    const auto stats = summary_stats(b, estep_pair(b, r, tau));
    const Eigen::MatrixXd marg = state_marginals(b, tau);
    for (int t = 0; t < tau; ++t) {
      const Eigen::VectorXd sums = stats.nu_t[t].colwise().sum().transpose();
      worst = std::max(worst, (sums - marg.row(t).transpose()).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-9, fmt("50 pairs, max |sum_sigma nu_t - marginal| = %.3g (tol 1e-9)", worst)};
}

Outcome criterion7(const ValidityTally& tally) {
  const double floor = kDefaultCovFloor;
  return {tally.worst_sum_error <= 1e-12 && tally.min_cov_diag >= floor && tally.min_entry >= 0.0,
          fmt("max |sum - 1| = %.3g (tol 1e-12), min entry %.3g, min covariance diagonal %.3g (floor %.0e)",
              tally.worst_sum_error, tally.min_entry, tally.min_cov_diag, floor)};
}

Outcome criterion8() {
  int trace_failures = 0;
  int traces = 0;
  int separated = 0;
  double lowest = 1.0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(8008, seed));
    const auto data = two_population_dataset(50, 20, rng);
    const H3mFit fit = h3m_em(data.sequences, 2, 2, 1, EmConfig{}, rng);
    const double acc = matched_accuracy(argmax_rows(fit.posteriors), data.labels);
    separated += acc >= 0.95;
    lowest = std::min(lowest, acc);
    trace_failures += !trace_monotone(fit.loglik_trace, 1e-8);
    const HmmFit single = baum_welch(data.sequences, 2, 1, EmConfig{}, rng);
    trace_failures += !trace_monotone(single.loglik_trace, 1e-8);

    SynthStructure st;
    st.n_mix = 2;
    const auto bench = synth_benchmark(2, 2, 4.0, st, rng);
    const auto synth = sample_dataset(bench.models, bench.labels, 10, 20, rng);
    trace_failures += !trace_monotone(baum_welch(synth.sequences, 2, 2, EmConfig{}, rng).loglik_trace, 1e-8);
    trace_failures += !trace_monotone(h3m_em(synth.sequences, 2, 2, 2, EmConfig{}, rng).loglik_trace, 1e-8);
    traces += 4;
  }
  return {trace_failures == 0 && separated >= 9,
          fmt("%d/%d traces non-monotone; h3m_em accuracy >= 0.95 in %d/10 seeds (need 9, lowest %.3f)",
              trace_failures, traces, separated, lowest)};
}

struct PipelineRecord {
  std::vector<double> bounds;
  std::vector<int> labels;
  double pipeline_acc = 0.0;
  double direct_acc = 0.0;
};

std::vector<PipelineRecord> pipeline_runs() {
  std::vector<PipelineRecord> out;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(9009, seed));
    const auto data = two_population_dataset(100, 20, rng);
    SplitConfig cfg;
    cfg.n_portions = 4;
    cfg.seed = derive_seed(9010, seed);
    cfg.threads = 4;
    const auto res = split_estimate_aggregate(data.sequences, cfg);
    PipelineRecord rec;
    rec.bounds = res.reduction.bound_history;
    rec.labels = argmax_rows(h3m_posteriors(res.model, data.sequences));
    rec.pipeline_acc = matched_accuracy(rec.labels, data.labels);
    Rng direct_rng(derive_seed(9011, seed));
    const auto direct = h3m_em(data.sequences, 2, 2, 1, EmConfig{}, direct_rng);
    rec.direct_acc = matched_accuracy(argmax_rows(direct.posteriors), data.labels);
    out.push_back(std::move(rec));
  }
  return out;
}

Outcome criterion9(const std::vector<PipelineRecord>& runs) {
  int within = 0;
  double worst_gap = -INFINITY;
  for (const auto& r : runs) {
    const double gap = r.direct_acc - r.pipeline_acc;
    within += gap <= 0.05;
    worst_gap = std::max(worst_gap, gap);
  }
  return {within == 10, fmt("pipeline accuracy within 0.05 of direct h3m_em in %d/10 seeds (worst gap %.3f)",
                            within, worst_gap)};
}

Outcome criterion10(const std::vector<ReductionRecord>& c4, const std::vector<RecoveryRecord>& c5,
                    const std::vector<PipelineRecord>& c9) {
  const auto c4b = monotonicity_runs(nullptr);
  const auto c5b = recovery_runs(nullptr);
  const auto c9b = pipeline_runs();
  int mismatches = 0;
  for (std::size_t k = 0; k < c4.size(); ++k) {
    mismatches += c4[k].bounds != c4b[k].bounds || c4[k].labels != c4b[k].labels;
  }
  for (std::size_t k = 0; k < c5.size(); ++k) {
    mismatches += c5[k].flat.bounds != c5b[k].flat.bounds || c5[k].flat.labels != c5b[k].flat.labels ||
                  c5[k].ladder_bounds != c5b[k].ladder_bounds || c5[k].top_labels != c5b[k].top_labels;
  }
  for (std::size_t k = 0; k < c9.size(); ++k) {
    mismatches += c9[k].bounds != c9b[k].bounds || c9[k].labels != c9b[k].labels;
  }
  return {mismatches == 0, fmt("%d of 40 re-runs differ in bound history or labels", mismatches)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const std::function<Outcome()>& fn) {
    const auto start = Clock::now();
    const Outcome o = fn();
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("criterion %2d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  };

  ValidityTally tally;
  std::vector<ReductionRecord> c4;
  std::vector<RecoveryRecord> c5;
  std::vector<PipelineRecord> c9;

  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);
  report(4, [&] {
    c4 = monotonicity_runs(&tally);
    return criterion4(c4);
  });
  report(5, [&] {
    c5 = recovery_runs(&tally);
    return criterion5(c5);
  });
  report(6, criterion6);
  report(7, [&] { return criterion7(tally); });
  report(8, criterion8);
  report(9, [&] {
    c9 = pipeline_runs();
    return criterion9(c9);
  });
  report(10, [&] { return criterion10(c4, c5, c9); });

  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
