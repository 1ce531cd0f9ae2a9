#include "replica/evaluation.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace replica {

StepPolicy make_baseline_policy(BaselineKind kind, std::uint64_t seed) {
  switch (kind) {
    case BaselineKind::kStatic:
      return [](const ReplicationEnv& env) { return static_action(env.cluster_config().num_nodes); };
    case BaselineKind::kRandom: {
      auto rng = std::make_shared<Rng>(make_rng(seed, Stream::kBaseline));
      return [rng](const ReplicationEnv& env) {
        return random_action(env.cluster_config().num_nodes, *rng);
      };
    }
    case BaselineKind::kGreedyBalance:
      return [](const ReplicationEnv& env) {
        return greedy_balance_action(env.state(), env.cluster_config(), env.last_load_vector());
      };
  }
  throw std::invalid_argument("unknown baseline");
}

StepPolicy make_network_policy(PolicyParams params, ActionSpace space, bool stochastic,
                               std::uint64_t seed) {
  auto shared = std::make_shared<const PolicyParams>(std::move(params));
  auto rng = std::make_shared<Rng>(make_rng(seed, Stream::kActionSampling));
  return [shared, space, stochastic, rng](const ReplicationEnv& env) {
    const ActionDistribution dist = forward(*shared, env.observation());
    const int head = stochastic ? sample_action(dist, *rng).first : greedy_action(dist);
    return space.to_env_index(head);
  };
}

EvalReport evaluate_policy(const ClusterConfig& cluster, const WorkloadConfig& workload,
                           const StepPolicy& policy, int episodes, std::uint64_t eval_seed,
                           std::string entrant) {
  EvalReport report;
  report.entrant = std::move(entrant);
  report.episodes = episodes;

  double sum = 0.0;
  double sum_sq = 0.0;
  double reward_sum = 0.0;
  long long ignored = 0;
  std::vector<double> episode_means;

  for (int e = 0; e < episodes; ++e) {
    ReplicationEnv env(cluster, workload, derive_seed(eval_seed, Stream::kEvaluation, e));
    double episode_sum = 0.0;
    while (!env.episode_done()) {
      const StepResult result = env.step(policy(env));
      const double variance = load_variance(result.load_vector);
      sum += variance;
      sum_sq += variance * variance;
      episode_sum += variance;
      reward_sum += result.reward;
      if (!result.action_applied) ++ignored;
      ++report.steps;
    }
    episode_means.push_back(episode_sum / cluster.episode_length);
  }

  if (report.steps == 0) return report;
  const double n = static_cast<double>(report.steps);
  report.mean_variance = sum / n;
  report.std_variance = std::sqrt(std::max(0.0, sum_sq / n - report.mean_variance * report.mean_variance));
  report.mean_reward = reward_sum / n;
  report.ignored_fraction = static_cast<double>(ignored) / n;
  double dev = 0.0;
  for (double m : episode_means) dev += (m - report.mean_variance) * (m - report.mean_variance);
  report.episode_std_variance = std::sqrt(dev / episode_means.size());
  return report;
}

}  // namespace replica
