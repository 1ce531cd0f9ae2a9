#ifndef REPLICA_EVALUATION_HPP_
#define REPLICA_EVALUATION_HPP_

#include <cstdint>
#include <functional>
#include <string>

#include "replica/baselines.hpp"
#include "replica/environment.hpp"
#include "replica/policy_net.hpp"
#include "replica/ppo.hpp"

namespace replica {

// Chooses the environment action index for the current state.
using StepPolicy = std::function<int(const ReplicationEnv&)>;

StepPolicy make_baseline_policy(BaselineKind kind, std::uint64_t seed);

// Samples from the policy when `stochastic`, otherwise takes the argmax logit.
StepPolicy make_network_policy(PolicyParams params, ActionSpace space, bool stochastic,
                               std::uint64_t seed);

struct EvalReport {
  std::string entrant;
  int episodes = 0;
  long long steps = 0;
  double mean_variance = 0.0;
  double std_variance = 0.0;          // over every evaluation step
  double episode_std_variance = 0.0;  // of per-episode mean variances
  double mean_reward = 0.0;
  double ignored_fraction = 0.0;
};

// Episode e runs in an environment seeded by derive_seed(eval_seed, e), so
// every entrant evaluated with the same eval_seed sees the same placements and
// request streams.
EvalReport evaluate_policy(const ClusterConfig& cluster, const WorkloadConfig& workload,
                           const StepPolicy& policy, int episodes, std::uint64_t eval_seed,
                           std::string entrant);

}  // namespace replica

#endif  // REPLICA_EVALUATION_HPP_
