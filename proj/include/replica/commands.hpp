#ifndef REPLICA_COMMANDS_HPP_
#define REPLICA_COMMANDS_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "replica/checkpoint.hpp"
#include "replica/evaluation.hpp"
#include "replica/experiment.hpp"
#include "replica/ppo.hpp"

namespace replica {

// The experiment commands behind the CLI. Each writes its artifacts under
// config.output_dir and a human-readable summary to `log`.

struct TrainOutcome {
  TrainResult result;
  std::filesystem::path metrics_csv;
  std::filesystem::path checkpoint;
};

// Trains config.policy (rl_e or rl_ne); writes metrics.csv, timing.csv,
// checkpoint.bin and the learning/entropy SVG charts. On divergence the
// partial metrics are written before TrainingDiverged propagates.
TrainOutcome run_train(const ExperimentConfig& config, std::ostream& log);

Checkpoint make_checkpoint(const ExperimentConfig& config, const TrainResult& result);

// A compare/evaluate participant: a baseline name, rl_e/rl_ne (trained on the
// spot), or a checkpoint file, optionally written as label=path.
struct Entrant {
  std::string label;
  PolicyKind kind = PolicyKind::kStatic;
  std::filesystem::path checkpoint;  // empty unless loaded from file
};

Entrant parse_entrant(std::string_view token);

// Builds the step policy for an entrant under `config`. Checkpoint entrants
// are checked against the config's observation and action dimensions.
StepPolicy make_entrant_policy(const ExperimentConfig& config, const Entrant& entrant,
                               ClusterConfig& cluster_out, std::ostream& log);

EvalReport run_evaluate(const ExperimentConfig& config, const Entrant& entrant, std::ostream& log);

// Evaluates every entrant on the same evaluation seeds; writes comparison.csv.
std::vector<EvalReport> run_compare(const ExperimentConfig& config,
                                    const std::vector<Entrant>& entrants, std::ostream& log);

// run_compare over M in {4, 6, 8} x C in {128, 256}, one sub-directory per
// cell, plus sweep_summary.csv with the RL-vs-best-baseline gap per cell.
void run_sweep(const ExperimentConfig& config, const std::vector<Entrant>& entrants,
               std::ostream& log);

struct WorkloadStats {
  long long steps = 0;
  long long requests = 0;
  double batch_mean = 0.0;
  double batch_variance = 0.0;
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  std::vector<double> rank_frequency;  // empirical, sorted non-increasing
};

// Samples `steps` batches with the configured workload (rotation included) and
// tests the block counts against their expected values given each step's
// mixture and batch size. Writes rank_frequency.csv, block_frequency.csv,
// batch_sizes.csv and workload_summary.csv.
WorkloadStats run_workload_stats(const ExperimentConfig& config, long long steps, std::ostream& log);

}  // namespace replica

#endif  // REPLICA_COMMANDS_HPP_
