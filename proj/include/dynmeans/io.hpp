// io.hpp - file formats.
//
// All sequence files are UTF-8 JSON Lines, one record per line:
//   batch sequence: {"t": <int>, "points": [[x, ...], ...]}   t strictly increasing
//   ground truth:   {"t": <int>, "labels": [<id>, ...]}       aligned with points
//   results:        first line {"config": {...}}, then per timestep
//                   {"t", "labels", "clusters", "cost", "iterations",
//                    "wall_s", "converged"}
// Doubles are serialized in shortest round-trip form, so reading a file back
// reproduces the written values exactly.  CSV exports are flat tables for
// plotting.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynmeans/pipeline.hpp"

namespace dynmeans {

// Parse or invariant failure in an input file; line is 1-based.
class MalformedInput : public std::runtime_error {
 public:
  MalformedInput(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

struct BatchSequenceData {
  std::vector<std::int64_t> timesteps;
  std::vector<Batch> batches;
};

struct TruthData {
  std::vector<std::int64_t> timesteps;
  std::vector<std::vector<ClusterId>> labels;
};

struct ClusterSnapshot {
  ClusterId id = 0;
  Point center;
  double weight = 0.0;
  int age = 0;
};

struct ResultFileData {
  struct Step {
    std::int64_t t = 0;
    std::vector<ClusterId> labels;
    std::vector<ClusterSnapshot> clusters;
    double cost = 0.0;
    int iterations = 0;
    double wall_s = 0.0;
    bool converged = true;
  };
  // resolved configuration echo
  double lambda = 0.0, q_penalty = 0.0, tau = 0.0;
  bool has_reparam = false;
  double n_q = 0.0, k_tau = 0.0;
  int restarts = 1, max_iters = 0;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<Step> steps;
};

void write_batch_sequence(const std::string& path, const BatchSequenceData& data);
BatchSequenceData read_batch_sequence(const std::string& path);

void write_truth(const std::string& path, const TruthData& data);
TruthData read_truth(const std::string& path);

// zero_timing replaces measured wall times with 0.0 so the output bytes are
// reproducible across runs.
void write_result(const std::string& path, const SequenceResult& result,
                  const RunConfig& cfg, const std::vector<std::int64_t>& timesteps,
                  bool zero_timing);
ResultFileData read_result(const std::string& path);

// CSV exports (header row + one data row per timestep / grid point).
void write_result_csv(const std::string& path, const ResultFileData& data);

struct SweepRow {
  double lambda = 0.0, n_q = 0.0, k_tau = 0.0;
  int trials = 0;
  double mean_tracked = 0.0, std_tracked = 0.0;
  double mean_untracked = 0.0, std_untracked = 0.0;
  double mean_step_ms = 0.0, std_step_ms = 0.0;
};
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_sweep_jsonl(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace dynmeans
