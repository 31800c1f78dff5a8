#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "report.hpp"
#include "vhem/engine.hpp"
#include "vhem/errors.hpp"
#include "vhem/hierarchy.hpp"
#include "vhem/io.hpp"
#include "vhem/pipeline.hpp"
#include "vhem/synth.hpp"

namespace vhem::cli {

namespace fs = std::filesystem;

namespace {

// Flags shared by every subcommand; each can be overridden through a
// VHEM_* environment variable.
struct Common {
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;
  double cov_floor = kDefaultCovFloor;
  std::string cov_type = "diag";
  unsigned threads = 1;
  std::string report_dir;

  EmConfig em() const {
    EmConfig c;
    c.max_iters = max_iters;
    c.tol = tol;
    c.cov_floor = cov_floor;
    c.cov_type = covariance_type_from_string(cov_type);
    return c;
  }

  fs::path reports() const {
    if (report_dir.empty()) return {};
    fs::create_directories(report_dir);
    return report_dir;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->envname("VHEM_SEED")->capture_default_str();
  cmd->add_option("--max-iters", c.max_iters, "Maximum EM iterations")
      ->envname("VHEM_MAX_ITERS")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--tol", c.tol, "Relative improvement threshold")
      ->envname("VHEM_TOL")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--cov-floor", c.cov_floor, "Lower bound on covariance diagonals")
      ->envname("VHEM_COV_FLOOR")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--cov-type", c.cov_type, "Covariance representation")
      ->envname("VHEM_COV_TYPE")->check(CLI::IsMember({"diag", "full"}))->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")
      ->envname("VHEM_THREADS")->capture_default_str();
  cmd->add_option("--report-dir", c.report_dir, "Directory for CSV run reports")->envname("VHEM_REPORT_DIR");
}

struct VhemFlags {
  double virtual_samples = 0.0;
  int tau_virtual = 10;
  std::string init = "subset-perturb";
  std::string init_file;
  int restarts = 1;
};

void add_vhem_flags(CLI::App* cmd, VhemFlags& v) {
  cmd->add_option("--virtual-samples", v.virtual_samples, "Total virtual sample count N (0 = 1e4 * K^b)")
      ->envname("VHEM_VIRTUAL_SAMPLES")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--tau-virtual", v.tau_virtual, "Length of virtual sequences")
      ->envname("VHEM_TAU_VIRTUAL")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--init", v.init, "Initialization of the reduced model")
      ->envname("VHEM_INIT")->check(CLI::IsMember({"subset-perturb", "random", "file"}))->capture_default_str();
  cmd->add_option("--init-file", v.init_file, "Model file used with --init file");
  cmd->add_option("--restarts", v.restarts, "Independent starts; the highest final bound wins")
      ->envname("VHEM_RESTARTS")->check(CLI::PositiveNumber)->capture_default_str();
}

VhemConfig make_vhem_config(const Common& c, const VhemFlags& v, int k_reduced) {
  VhemConfig cfg;
  cfg.n_virtual = v.virtual_samples;
  cfg.tau_virtual = v.tau_virtual;
  cfg.k_reduced = k_reduced;
  cfg.max_iters = c.max_iters;
  cfg.tol = c.tol;
  cfg.cov_floor = c.cov_floor;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.restarts = v.restarts;
  cfg.init_strategy = init_strategy_from_string(v.init);
  if (cfg.init_strategy == InitStrategy::Provided) {
    if (v.init_file.empty()) throw ValidationError("--init file requires --init-file");
    cfg.initial_model = load_h3m(v.init_file);
  }
  return cfg;
}

void log(const char* format, auto... args) {
  std::fprintf(stderr, format, args...);
  std::fputc('\n', stderr);
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

void write_assignments(const fs::path& path, const std::vector<std::string>& ids,
                       const Eigen::MatrixXd& probs) {
  std::vector<std::string> header{"index", "id", "label"};
  for (Eigen::Index k = 0; k < probs.cols(); ++k) header.push_back("p" + std::to_string(k));
  CsvWriter csv(path, header);
  const auto labels = argmax_rows(probs);
  for (Eigen::Index n = 0; n < probs.rows(); ++n) {
    csv.cell(static_cast<long long>(n)).cell(ids[n]).cell(labels[n]);
    for (Eigen::Index k = 0; k < probs.cols(); ++k) csv.cell(probs(n, k));
    csv.end_row();
  }
}

std::vector<std::string> sequence_ids(const std::vector<Sequence>& data) {
  std::vector<std::string> ids;
  for (std::size_t n = 0; n < data.size(); ++n) ids.push_back(data[n].id.empty() ? std::to_string(n) : data[n].id);
  return ids;
}

std::vector<std::string> index_ids(int n) {
  std::vector<std::string> ids;
  for (int k = 0; k < n; ++k) ids.push_back(std::to_string(k));
  return ids;
}

void write_reduction_report(const fs::path& dir, const ReductionResult& r) {
  write_trace(dir / "bound.csv", "bound", r.bound_history);
  write_assignments(dir / "assignments.csv", index_ids(static_cast<int>(r.assignments.z.rows())), r.assignments.z);
  CsvWriter summary(dir / "summary.csv", {"iterations", "converged", "effective_k", "rescues", "selected_restart", "final_bound"});
  summary.cell(r.iterations).cell(r.converged ? "true" : "false").cell(r.effective_k)
      .cell(r.rescue_iterations.size()).cell(r.selected_restart).cell(r.bound_history.back());
  summary.end_row();
}

std::vector<int> read_label_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open labels file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty labels file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), "label");
  if (it == header.end()) throw ParseError(path + ":1: no 'label' column in header");
  const auto column = static_cast<std::size_t>(it - header.begin());
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t k = 0; k <= column; ++k) {
      if (!std::getline(ss, cell, ',')) throw ParseError(path + ":" + std::to_string(line_no) + ": missing label");
    }
    try {
      std::size_t used = 0;
      labels.push_back(std::stoi(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": label '" + cell + "' is not an integer");
    }
  }
  return labels;
}

void cmd_train_hmm(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-hmm", "Fit an HMM with Baum-Welch");
  auto c = std::make_shared<Common>();
  auto data = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto states = std::make_shared<int>(2);
  auto mix = std::make_shared<int>(1);
  auto per_sequence = std::make_shared<bool>(false);
  add_common(cmd, *c);
  cmd->add_option("--data", *data, "Dataset (JSON lines)")->required();
  cmd->add_option("--out", *out, "Output model file")->required();
  cmd->add_option("--states", *states, "Hidden states N")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--mix", *mix, "Emission mixture components M")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--per-sequence", *per_sequence,
                "Fit one HMM per sequence and save them as a uniform mixture (leaves for reduce/hier)");
  cmd->callback([=] {
    Timings timings;
    timings.start("load");
    const auto seqs = load_dataset(*data);
    timings.stop();
    const fs::path dir = c->reports();
    timings.start("train");
    if (*per_sequence) {
      std::vector<Hmm> leaves;
      std::vector<double> final_ll;
      for (std::size_t n = 0; n < seqs.size(); ++n) {
        Rng rng(derive_seed(c->seed, n));
        HmmFit fit = baum_welch({seqs[n]}, *states, *mix, c->em(), rng);
        final_ll.push_back(fit.loglik_trace.back());
        leaves.push_back(std::move(fit.model));
      }
      timings.stop();
      save_model(*out, make_model_file(H3m::uniform(std::move(leaves)), c->seed));
      log("trained %zu per-sequence HMMs -> %s", seqs.size(), out->c_str());
      if (!dir.empty()) {
        CsvWriter csv(dir / "leaves.csv", {"index", "id", "label", "loglik"});
        for (std::size_t n = 0; n < seqs.size(); ++n) {
          csv.cell(n).cell(seqs[n].id).cell(seqs[n].label.value_or("")).cell(final_ll[n]);
          csv.end_row();
        }
      }
    } else {
      Rng rng(c->seed);
      const HmmFit fit = baum_welch(seqs, *states, *mix, c->em(), rng);
      timings.stop();
      save_model(*out, make_model_file(fit.model, c->seed));
      log("baum-welch: %d iterations, converged=%s, loglik %.6f -> %s", fit.iterations,
          fit.converged ? "yes" : "no", fit.loglik_trace.back(), out->c_str());
      if (!dir.empty()) write_trace(dir / "loglik.csv", "loglik", fit.loglik_trace);
    }
    if (!dir.empty()) timings.write(dir);
  });
}

void cmd_train_h3m(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-h3m", "Fit a mixture of HMMs with sequence-level EM");
  auto c = std::make_shared<Common>();
  auto data = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto k = std::make_shared<int>(2);
  auto states = std::make_shared<int>(2);
  auto mix = std::make_shared<int>(1);
  add_common(cmd, *c);
  cmd->add_option("--data", *data, "Dataset (JSON lines)")->required();
  cmd->add_option("--out", *out, "Output model file")->required();
  cmd->add_option("--k", *k, "Mixture components K")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--states", *states, "Hidden states N")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--mix", *mix, "Emission mixture components M")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->callback([=] {
    Timings timings;
    timings.start("load");
    const auto seqs = load_dataset(*data);
    timings.stop();
    timings.start("train");
    Rng rng(c->seed);
    const H3mFit fit = h3m_em(seqs, *k, *states, *mix, c->em(), rng, c->threads);
    timings.stop();
    save_model(*out, make_model_file(fit.model, c->seed));
    log("h3m-em: %d iterations, converged=%s, loglik %.6f, %zu re-seeds -> %s", fit.iterations,
        fit.converged ? "yes" : "no", fit.loglik_trace.back(), fit.reseed_iterations.size(), out->c_str());
    if (const fs::path dir = c->reports(); !dir.empty()) {
      write_trace(dir / "loglik.csv", "loglik", fit.loglik_trace);
      write_assignments(dir / "assignments.csv", sequence_ids(seqs), fit.posteriors);
      timings.write(dir);
    }
  });
}

void cmd_reduce(CLI::App& app) {
  auto* cmd = app.add_subcommand("reduce", "Cluster the components of a base H3M with VHEM");
  auto c = std::make_shared<Common>();
  auto v = std::make_shared<VhemFlags>();
  auto model = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto kr = std::make_shared<int>(2);
  add_common(cmd, *c);
  add_vhem_flags(cmd, *v);
  cmd->add_option("--model", *model, "Base model file (H3M, or HMM as a single component)")->required();
  cmd->add_option("--out", *out, "Output reduced model file")->required();
  cmd->add_option("--kr", *kr, "Reduced components K^r")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->callback([=] {
    Timings timings;
    const H3m base = load_h3m(*model);
    timings.start("reduce");
    const ReductionResult r = vhem_reduce(base, make_vhem_config(*c, *v, *kr));
    timings.stop();
    save_model(*out, make_model_file(r.reduced, c->seed));
    log("vhem: %d iterations, converged=%s, bound %.6f, effective K^r %d, %zu rescues -> %s", r.iterations,
        r.converged ? "yes" : "no", r.bound_history.back(), r.effective_k, r.rescue_iterations.size(), out->c_str());
    if (const fs::path dir = c->reports(); !dir.empty()) {
      write_reduction_report(dir, r);
      timings.write(dir);
    }
  });
}

void cmd_hier(CLI::App& app) {
  auto* cmd = app.add_subcommand("hier", "Build a hierarchy of HMM clusters by repeated VHEM");
  auto c = std::make_shared<Common>();
  auto v = std::make_shared<VhemFlags>();
  auto leaves_path = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto ladder = std::make_shared<std::vector<int>>();
  add_common(cmd, *c);
  add_vhem_flags(cmd, *v);
  cmd->add_option("--leaves", *leaves_path, "Leaf HMMs as one mixture file (e.g. from train-hmm --per-sequence)")->required();
  cmd->add_option("--ladder", *ladder, "Cluster counts per level, strictly decreasing, e.g. 8,4,2")
      ->required()->delimiter(',');
  cmd->add_option("--out-dir", *out_dir, "Directory for level_<l>.json model files")->required();
  cmd->callback([=] {
    Timings timings;
    const H3m leaves = load_h3m(*leaves_path);
    if (v->init == "file") throw ValidationError("hier does not accept --init file");
    timings.start("hier");
    const auto levels = hier_cluster(leaves.components, *ladder, make_vhem_config(*c, *v, 1));
    timings.stop();
    fs::create_directories(*out_dir);
    for (std::size_t l = 1; l < levels.size(); ++l) {
      save_model(fs::path(*out_dir) / ("level_" + std::to_string(l) + ".json"), make_model_file(levels[l].models, c->seed));
      log("level %zu: K=%d, bound %.6f", l, levels[l].size, levels[l].bound_history.back());
    }
    if (const fs::path dir = c->reports(); !dir.empty()) {
      std::vector<std::string> header{"leaf"};
      for (std::size_t l = 1; l < levels.size(); ++l) header.push_back("level_" + std::to_string(l));
      CsvWriter labels(dir / "labels.csv", header);
      std::vector<std::vector<int>> per_level;
      for (std::size_t l = 1; l < levels.size(); ++l) per_level.push_back(leaf_labels(levels, static_cast<int>(l)));
      for (int i = 0; i < leaves.size(); ++i) {
        labels.cell(i);
        for (const auto& lv : per_level) labels.cell(lv[i]);
        labels.end_row();
      }
      CsvWriter bounds(dir / "bound.csv", {"level", "iteration", "bound"});
      for (std::size_t l = 1; l < levels.size(); ++l) {
        for (std::size_t k = 0; k < levels[l].bound_history.size(); ++k) {
          bounds.cell(l).cell(k).cell(levels[l].bound_history[k]);
          bounds.end_row();
        }
      }
      timings.write(dir);
    }
  });
}

void cmd_synth(CLI::App& app) {
  auto* cmd = app.add_subcommand("synth", "Generate the grouped synthetic HMM benchmark");
  auto c = std::make_shared<Common>();
  auto groups = std::make_shared<int>(4);
  auto per_group = std::make_shared<int>(5);
  auto separation = std::make_shared<double>(4.0);
  auto st = std::make_shared<SynthStructure>();
  auto per_model = std::make_shared<int>(0);
  auto out_models = std::make_shared<std::string>();
  auto out_data = std::make_shared<std::string>();
  auto out_labels = std::make_shared<std::string>();
  add_common(cmd, *c);
  cmd->add_option("--groups", *groups, "Number of groups")->check(CLI::Range(2, 1 << 20))->capture_default_str();
  cmd->add_option("--per-group", *per_group, "HMMs per group")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--separation", *separation, "Offset between neighbouring group means")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--states", st->n_states, "Hidden states N")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--mix", st->n_mix, "Emission mixture components M")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--dim", st->dim, "Observation dimension d")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--tau", st->tau, "Length of sampled sequences")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--sequences-per-model", *per_model, "Sequences sampled from each HMM for --out-data")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--out-models", *out_models, "Write the member HMMs as a uniform mixture");
  cmd->add_option("--out-data", *out_data, "Write sampled sequences (JSON lines)");
  cmd->add_option("--out-labels", *out_labels, "Write ground-truth group of every member (CSV)");
  cmd->callback([=] {
    SynthStructure structure = *st;
    structure.cov_type = covariance_type_from_string(c->cov_type);
    Rng rng(c->seed);
    const auto bench = synth_benchmark(*groups, *per_group, *separation, structure, rng);
    if (!out_models->empty()) save_model(*out_models, make_model_file(H3m::uniform(bench.models), c->seed));
    if (!out_labels->empty()) {
      CsvWriter csv(*out_labels, {"index", "label"});
      for (std::size_t k = 0; k < bench.labels.size(); ++k) {
        csv.cell(k).cell(bench.labels[k]);
        csv.end_row();
      }
    }
    if (!out_data->empty()) {
      if (*per_model < 1) throw ValidationError("--out-data needs --sequences-per-model >= 1");
      save_dataset(*out_data, sample_dataset(bench.models, bench.labels, *per_model, structure.tau, rng).sequences);
    }
    log("synth: %d groups x %d HMMs, separation %g", *groups, *per_group, *separation);
  });
}

void cmd_eval_rand(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval-rand", "Rand index between two labelings (CSV files with a 'label' column)");
  auto c = std::make_shared<Common>();
  auto a = std::make_shared<std::string>();
  auto b = std::make_shared<std::string>();
  add_common(cmd, *c);
  cmd->add_option("--truth", *a, "Reference labels")->required();
  cmd->add_option("--pred", *b, "Predicted labels")->required();
  cmd->callback([=] {
    const auto truth = read_label_column(*a);
    const auto pred = read_label_column(*b);
    const double ri = rand_index(truth, pred);
    std::printf("%s\n", format_double(ri).c_str());
    if (const fs::path dir = c->reports(); !dir.empty()) {
      CsvWriter csv(dir / "rand.csv", {"items", "rand_index"});
      csv.cell(truth.size()).cell(ri);
      csv.end_row();
    }
  });
}

void cmd_mc_oracle(CLI::App& app) {
  auto* cmd = app.add_subcommand("mc-oracle", "Monte Carlo E_base[log p(y | reduced)] next to the variational bound");
  auto c = std::make_shared<Common>();
  auto base = std::make_shared<std::string>();
  auto reduced = std::make_shared<std::string>();
  auto tau = std::make_shared<int>(10);
  auto samples = std::make_shared<int>(100000);
  add_common(cmd, *c);
  cmd->add_option("--base", *base, "Base HMM file")->required();
  cmd->add_option("--reduced", *reduced, "Reduced HMM file")->required();
  cmd->add_option("--tau", *tau, "Sequence length")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--samples", *samples, "Monte Carlo samples")->check(CLI::Range(2, 1 << 30))->capture_default_str();
  cmd->callback([=] {
    const Hmm b = load_hmm(*base);
    const Hmm r = load_hmm(*reduced);
    Rng rng(c->seed);
    const auto est = mc_expected_loglik(b, r, *tau, *samples, rng);
    const double bound = estep_pair(b, r, *tau).objective;
    std::printf("mc_mean,mc_stderr,variational_bound\n%s,%s,%s\n", format_double(est.mean).c_str(),
                format_double(est.stderr_mean).c_str(), format_double(bound).c_str());
    if (const fs::path dir = c->reports(); !dir.empty()) {
      CsvWriter csv(dir / "mc.csv", {"tau", "samples", "mc_mean", "mc_stderr", "variational_bound"});
      csv.cell(*tau).cell(*samples).cell(est.mean).cell(est.stderr_mean).cell(bound);
      csv.end_row();
    }
  });
}

void cmd_split_pipeline(CLI::App& app) {
  auto* cmd = app.add_subcommand("split-pipeline", "Split data, fit an H3M per portion, aggregate with VHEM");
  auto c = std::make_shared<Common>();
  auto v = std::make_shared<VhemFlags>();
  auto data = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto cfg = std::make_shared<SplitConfig>();
  add_common(cmd, *c);
  add_vhem_flags(cmd, *v);
  cmd->add_option("--data", *data, "Dataset (JSON lines)")->required();
  cmd->add_option("--out", *out, "Output model file")->required();
  cmd->add_option("--portions", cfg->n_portions, "Number of disjoint portions")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--per-portion-k", cfg->per_portion_k, "Components fitted per portion")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--kr", cfg->final_k, "Components of the final model")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--states", cfg->n_states, "Hidden states N")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--mix", cfg->n_mix, "Emission mixture components M")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->callback([=] {
    Timings timings;
    timings.start("load");
    const auto seqs = load_dataset(*data);
    timings.stop();
    SplitConfig run = *cfg;
    run.em = c->em();
    run.vhem = make_vhem_config(*c, *v, cfg->final_k);
    run.seed = c->seed;
    run.threads = c->threads;
    timings.start("pipeline");
    const SplitResult res = split_estimate_aggregate(seqs, run);
    timings.stop();
    save_model(*out, make_model_file(res.model, c->seed));
    log("split-pipeline: %zu portions, pooled %d components, final bound %.6f -> %s", res.portions.size(),
        res.pooled.size(), res.reduction.bound_history.back(), out->c_str());
    if (const fs::path dir = c->reports(); !dir.empty()) {
      CsvWriter portions(dir / "portions.csv", {"portion", "sequences", "loglik", "iterations"});
      for (std::size_t p = 0; p < res.portions.size(); ++p) {
        portions.cell(p).cell(res.portions[p].n_sequences).cell(res.portions[p].loglik).cell(res.portions[p].iterations);
        portions.end_row();
      }
      write_reduction_report(dir, res.reduction);
      write_assignments(dir / "sequence_assignments.csv", sequence_ids(seqs), h3m_posteriors(res.model, seqs, c->threads));
      timings.write(dir);
    }
  });
}

}  // namespace

void register_commands(CLI::App& app) {
  cmd_train_hmm(app);
  cmd_train_h3m(app);
  cmd_reduce(app);
  cmd_hier(app);
  cmd_synth(app);
  cmd_eval_rand(app);
  cmd_mc_oracle(app);
  cmd_split_pipeline(app);
}

}  // namespace vhem::cli
