// dynmeans - batch-sequential clustering CLI.
//
// Subcommands: generate (synthetic moving-Gaussian benchmark), cluster
// (run the algorithm over a batch-sequence file), eval (accuracy/time
// report against ground truth), sweep (parameter grid with repeated
// trials).  Exit codes: 0 success, 1 usage/flag error, 2 malformed input,
// 3 non-convergence (results still written).
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynmeans/baselines.hpp"
#include "dynmeans/eval.hpp"
#include "dynmeans/io.hpp"
#include "dynmeans/pipeline.hpp"
#include "dynmeans/synthgen.hpp"
#include "dynmeans/version.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitUnconverged = 3;

struct GenerateArgs {
  dynmeans::SynthConfig cfg;
  std::string out_path;
  std::string truth_path;
};

int run_generate(const GenerateArgs& args) {
  const auto data = dynmeans::generate(args.cfg);
  dynmeans::BatchSequenceData seq;
  dynmeans::TruthData truth;
  for (std::size_t t = 0; t < data.batches.size(); ++t) {
    seq.timesteps.push_back(static_cast<std::int64_t>(t));
    truth.timesteps.push_back(static_cast<std::int64_t>(t));
  }
  seq.batches = data.batches;
  truth.labels = data.labels;
  dynmeans::write_batch_sequence(args.out_path, seq);
  dynmeans::write_truth(args.truth_path, truth);

  std::size_t n_points = 0;
  for (const auto& b : data.batches) n_points += b.size();
  std::cout << "generated " << data.batches.size() << " timesteps, " << args.cfg.n_clusters
            << " live clusters per step, " << n_points << " points -> " << args.out_path
            << " (truth: " << args.truth_path << ")\n";
  return 0;
}

struct ParamFlags {
  double lambda = 0.0;
  std::optional<double> q, tau, n_q, k_tau;

  // Exactly one of (q, tau) / (n_q, k_tau) pairs, complete, no mixing.
  dynmeans::RunConfig to_run_config(int restarts, int max_iters, std::uint64_t seed) const {
    const bool direct = q.has_value() || tau.has_value();
    const bool reparam = n_q.has_value() || k_tau.has_value();
    if (direct && reparam)
      throw CLI::ValidationError("parameters",
                                 "pass either --q/--tau or --n-q/--k-tau, not a mixture");
    if (direct) {
      if (!q || !tau) throw CLI::ValidationError("parameters", "--q and --tau go together");
      dynmeans::DynMeansParams p;
      p.lambda = lambda;
      p.q_penalty = *q;
      p.tau = *tau;
      p.validate();
      return dynmeans::RunConfig::from_params(p, restarts, seed, max_iters);
    }
    if (!n_q || !k_tau)
      throw CLI::ValidationError("parameters",
                                 "pass --q/--tau or --n-q/--k-tau (with --lambda)");
    dynmeans::ReparamConfig r;
    r.lambda = lambda;
    r.n_q = *n_q;
    r.k_tau = *k_tau;
    return dynmeans::RunConfig::from_reparam(r, restarts, seed, max_iters);
  }
};

struct ClusterArgs {
  std::string input_path, output_path, csv_path;
  ParamFlags params;
  int restarts = 1;
  int max_iters = dynmeans::kDefaultMaxIters;
  bool no_timing = false;
};

int run_cluster(const ClusterArgs& args, std::uint64_t seed) {
  const auto cfg = args.params.to_run_config(args.restarts, args.max_iters, seed);
  const auto data = dynmeans::read_batch_sequence(args.input_path);
  const auto result = dynmeans::run_sequence(data.batches, cfg);
  dynmeans::write_result(args.output_path, result, cfg, data.timesteps, args.no_timing);
  if (!args.csv_path.empty())
    dynmeans::write_result_csv(args.csv_path, dynmeans::read_result(args.output_path));
  if (!result.all_converged) {
    std::cerr << "warning: some timesteps did not converge within --max-iters "
              << args.max_iters << " (results written)\n";
    return kExitUnconverged;
  }
  return 0;
}

struct EvalArgs {
  std::string result_path, truth_path, csv_path;
};

int run_eval(const EvalArgs& args) {
  const auto result = dynmeans::read_result(args.result_path);
  const auto truth = dynmeans::read_truth(args.truth_path);
  if (result.steps.size() != truth.labels.size())
    throw dynmeans::MalformedInput(args.truth_path, 1,
                                   "result and truth cover different timestep counts");
  std::vector<std::vector<dynmeans::ClusterId>> learned;
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    if (result.steps[i].t != truth.timesteps[i] ||
        result.steps[i].labels.size() != truth.labels[i].size())
      throw dynmeans::MalformedInput(args.truth_path, i + 1,
                                     "result and truth disagree on timestep " +
                                         std::to_string(truth.timesteps[i]));
    learned.push_back(result.steps[i].labels);
  }
  const auto report = dynmeans::tracked_accuracy(learned, truth.labels);

  double total_wall = 0.0;
  for (const auto& s : result.steps) total_wall += s.wall_s;
  const double mean_wall =
      result.steps.empty() ? 0.0 : total_wall / static_cast<double>(result.steps.size());

  std::cout << "tracked_accuracy   " << report.tracked << "\n"
            << "untracked_accuracy " << report.untracked << "\n"
            << "total_wall_s       " << total_wall << "\n"
            << "mean_step_wall_s   " << mean_wall << "\n\n";
  std::cout << "t,points,tracked_acc,untracked_acc,cost,wall_s\n";
  for (std::size_t i = 0; i < report.steps.size(); ++i) {
    const auto& row = report.steps[i];
    std::cout << result.steps[i].t << ',' << row.points << ',' << row.tracked_acc << ','
              << row.untracked_acc << ',' << result.steps[i].cost << ','
              << result.steps[i].wall_s << '\n';
  }
  if (!args.csv_path.empty()) {
    std::ofstream csv(args.csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open for writing: " + args.csv_path);
    csv << "t,points,tracked_acc,untracked_acc,cost,wall_s\n";
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
      const auto& row = report.steps[i];
      csv << result.steps[i].t << ',' << row.points << ',' << row.tracked_acc << ','
          << row.untracked_acc << ',' << result.steps[i].cost << ','
          << result.steps[i].wall_s << '\n';
    }
  }
  return 0;
}

struct SweepArgs {
  std::string input_path, truth_path, out_path, jsonl_path;
  std::vector<double> lambdas, n_qs, k_taus;
  int trials = 1;
  int restarts = 1;
  int max_iters = dynmeans::kDefaultMaxIters;
  bool no_timing = false;
};

int run_sweep(const SweepArgs& args, std::uint64_t seed) {
  const auto data = dynmeans::read_batch_sequence(args.input_path);
  const auto truth = dynmeans::read_truth(args.truth_path);
  if (data.batches.size() != truth.labels.size())
    throw dynmeans::MalformedInput(args.truth_path, 1,
                                   "input and truth cover different timestep counts");

  auto mean_std = [](const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return std::pair<double, double>{mean, sd};
  };

  std::vector<dynmeans::SweepRow> rows;
  for (const double lambda : args.lambdas) {
    for (const double n_q : args.n_qs) {
      for (const double k_tau : args.k_taus) {
        dynmeans::ReparamConfig r{lambda, n_q, k_tau};
        std::vector<double> tracked, untracked, step_ms;
        for (int trial = 0; trial < args.trials; ++trial) {
          // common random numbers: every grid point reuses the trial seeds
          const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(trial);
          const auto cfg = dynmeans::RunConfig::from_reparam(r, args.restarts, trial_seed,
                                                             args.max_iters);
          const auto result = dynmeans::run_sequence(data.batches, cfg);
          const auto report = dynmeans::tracked_accuracy(
              [&] {
                std::vector<std::vector<dynmeans::ClusterId>> l;
                for (const auto& s : result.steps) l.push_back(s.labels);
                return l;
              }(),
              truth.labels);
          tracked.push_back(report.tracked);
          untracked.push_back(report.untracked);
          double wall = 0.0;
          for (const auto& s : result.steps) wall += s.wall_seconds;
          step_ms.push_back(result.steps.empty()
                                ? 0.0
                                : 1e3 * wall / static_cast<double>(result.steps.size()));
        }
        dynmeans::SweepRow row;
        row.lambda = lambda;
        row.n_q = n_q;
        row.k_tau = k_tau;
        row.trials = args.trials;
        std::tie(row.mean_tracked, row.std_tracked) = mean_std(tracked);
        std::tie(row.mean_untracked, row.std_untracked) = mean_std(untracked);
        if (args.no_timing) {
          row.mean_step_ms = 0.0;
          row.std_step_ms = 0.0;
        } else {
          std::tie(row.mean_step_ms, row.std_step_ms) = mean_std(step_ms);
        }
        rows.push_back(row);
      }
    }
  }
  dynmeans::write_sweep_csv(args.out_path, rows);
  if (!args.jsonl_path.empty()) dynmeans::write_sweep_jsonl(args.jsonl_path, rows);
  std::cout << "swept " << rows.size() << " grid points x " << args.trials << " trials -> "
            << args.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynmeans: hard clustering of batch-sequential data with cluster "
               "birth, death and motion tracking"};
  app.set_version_flag("--version", dynmeans::kVersion);
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for all randomized behavior")->capture_default_str();

  GenerateArgs gen;
  auto* cmd_gen = app.add_subcommand("generate", "write a synthetic moving-Gaussian benchmark");
  cmd_gen->fallthrough();
  cmd_gen->add_option("--out", gen.out_path, "batch sequence output path")->required();
  cmd_gen->add_option("--truth", gen.truth_path, "ground-truth label output path")->required();
  cmd_gen->add_option("--clusters", gen.cfg.n_clusters, "live clusters per step")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--points-per-cluster", gen.cfg.points_per_cluster,
                      "points emitted per cluster per step")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--point-std", gen.cfg.point_std, "isotropic point noise std")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--motion-std", gen.cfg.motion_std, "per-step center drift std")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--death-prob", gen.cfg.death_prob,
                      "per-step probability a cluster dies and is replaced")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--steps", gen.cfg.n_steps, "number of timesteps")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  ClusterArgs clu;
  auto* cmd_clu = app.add_subcommand("cluster", "cluster a batch-sequence file");
  cmd_clu->fallthrough();
  cmd_clu->add_option("--input", clu.input_path, "batch sequence input path")->required();
  cmd_clu->add_option("--output", clu.output_path, "result output path")->required();
  cmd_clu->add_option("--csv", clu.csv_path, "flat per-timestep CSV export");
  cmd_clu->add_option("--lambda", clu.params.lambda, "new-cluster cost")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd_clu->add_option("--q", clu.params.q, "revival penalty per dormant step");
  cmd_clu->add_option("--tau", clu.params.tau, "motion-variance rate");
  cmd_clu->add_option("--n-q", clu.params.n_q,
                      "steps before revival becomes impossible (> 1)");
  cmd_clu->add_option("--k-tau", clu.params.k_tau,
                      "revival-distance multiplier at one dormant step (>= 1)");
  cmd_clu->add_option("--restarts", clu.restarts, "random scan-order restarts per timestep")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_clu->add_option("--max-iters", clu.max_iters, "iteration cap per timestep")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_clu->add_flag("--no-timing", clu.no_timing,
                    "write wall times as 0 for byte-reproducible output");

  EvalArgs ev;
  auto* cmd_ev = app.add_subcommand("eval", "score a result file against ground truth");
  cmd_ev->fallthrough();
  cmd_ev->add_option("--result", ev.result_path, "result file from `cluster`")->required();
  cmd_ev->add_option("--truth", ev.truth_path, "ground-truth label file")->required();
  cmd_ev->add_option("--csv", ev.csv_path, "per-step CSV export");

  SweepArgs sw;
  auto* cmd_sw = app.add_subcommand("sweep", "grid sweep over lambda x N_Q x k_tau");
  cmd_sw->fallthrough();
  cmd_sw->add_option("--input", sw.input_path, "batch sequence input path")->required();
  cmd_sw->add_option("--truth", sw.truth_path, "ground-truth label file")->required();
  cmd_sw->add_option("--out", sw.out_path, "sweep table CSV path")->required();
  cmd_sw->add_option("--jsonl", sw.jsonl_path, "sweep table JSONL path");
  cmd_sw->add_option("--lambda", sw.lambdas, "comma-separated lambda values")
      ->required()
      ->delimiter(',');
  cmd_sw->add_option("--n-q", sw.n_qs, "comma-separated N_Q values")->required()->delimiter(',');
  cmd_sw->add_option("--k-tau", sw.k_taus, "comma-separated k_tau values")
      ->required()
      ->delimiter(',');
  cmd_sw->add_option("--trials", sw.trials, "seeded trials per grid point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_sw->add_option("--restarts", sw.restarts, "random scan-order restarts per timestep")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_sw->add_option("--max-iters", sw.max_iters, "iteration cap per timestep")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_sw->add_flag("--no-timing", sw.no_timing,
                   "write time columns as 0 for byte-reproducible output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) {
      gen.cfg.seed = seed;
      return run_generate(gen);
    }
    if (cmd_clu->parsed()) return run_cluster(clu, seed);
    if (cmd_ev->parsed()) return run_eval(ev);
    if (cmd_sw->parsed()) return run_sweep(sw, seed);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dynmeans::MalformedInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return 0;
}
