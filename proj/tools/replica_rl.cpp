// Command-line front end: train, evaluate, compare, workload-stats.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "replica/commands.hpp"
#include "replica/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool full = false;
  std::optional<int> episodes;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file (INI)");
  cmd->add_option("--seed", flags.seed, "experiment seed");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_flag("--full", flags.full, "train for the full 500k timesteps");
  cmd->add_option("--episodes", flags.episodes, "evaluation episodes");
}

replica::ExperimentConfig resolve(const CommonFlags& flags) {
  replica::ExperimentConfig config = flags.config_path.empty()
                                         ? replica::default_experiment_config()
                                         : replica::load_experiment_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
  if (flags.full) config.ppo.total_timesteps = replica::kFullTimesteps;
  if (flags.episodes) config.eval_episodes = *flags.episodes;
  replica::finalize(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive block replication: simulator, PPO trainer and baselines"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, compare_flags, stats_flags;
  std::string policy_override;

  auto* train = app.add_subcommand("train", "train an RL replication policy");
  add_common(train, train_flags);
  train->add_option("--policy", policy_override, "rl_e or rl_ne (overrides the config)");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint or a baseline");
  add_common(evaluate, eval_flags);
  std::string entrant_token;
  evaluate->add_option("entrant", entrant_token, "static | random | greedy | checkpoint path")
      ->required();
  evaluate->add_flag("--greedy", "take the argmax action instead of sampling");

  auto* compare = app.add_subcommand("compare", "evaluate several entrants on shared seeds");
  add_common(compare, compare_flags);
  std::vector<std::string> entrant_tokens;
  compare->add_option("entrants", entrant_tokens,
                      "rl_e | rl_ne | static | random | greedy | [label=]checkpoint")
      ->required();
  compare->add_flag("--sweep", "repeat over M in {4,6,8} x C in {128,256}");
  compare->add_flag("--greedy", "take the argmax RL action instead of sampling");

  auto* stats = app.add_subcommand("workload-stats", "empirical workload distribution report");
  add_common(stats, stats_flags);
  long long stat_steps = 10000;
  stats->add_option("--steps", stat_steps, "number of request batches to sample");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      replica::ExperimentConfig config = resolve(train_flags);
      if (!policy_override.empty()) {
        const auto kind = replica::parse_policy_kind(policy_override);
        if (!kind) throw std::invalid_argument("unknown policy '" + policy_override + "'");
        config.policy = *kind;
        replica::finalize(config);
      }
      replica::run_train(config, std::cout);
    } else if (evaluate->parsed()) {
      replica::ExperimentConfig config = resolve(eval_flags);
      if (evaluate->count("--greedy") > 0) config.stochastic_eval = false;
      const replica::Entrant entrant = replica::parse_entrant(entrant_token);
      replica::run_evaluate(config, entrant, std::cout);
    } else if (compare->parsed()) {
      replica::ExperimentConfig config = resolve(compare_flags);
      if (compare->count("--greedy") > 0) config.stochastic_eval = false;
      std::vector<replica::Entrant> entrants;
      for (const auto& token : entrant_tokens) entrants.push_back(replica::parse_entrant(token));
      if (compare->count("--sweep") > 0) {
        replica::run_sweep(config, entrants, std::cout);
      } else {
        replica::run_compare(config, entrants, std::cout);
      }
    } else if (stats->parsed()) {
      replica::run_workload_stats(resolve(stats_flags), stat_steps, std::cout);
    }
  } catch (const replica::TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << " (" << e.metrics.size() << " metric rows kept)\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
