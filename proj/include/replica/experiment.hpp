#ifndef REPLICA_EXPERIMENT_HPP_
#define REPLICA_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "replica/cluster.hpp"
#include "replica/ppo.hpp"
#include "replica/workload.hpp"

namespace replica {

// rl_e: learned, all three action kinds. rl_ne: learned, no Remove (2 M^2 head).
enum class PolicyKind { kRlE, kRlNe, kStatic, kRandom, kGreedy };

std::optional<PolicyKind> parse_policy_kind(std::string_view name);
std::string_view policy_name(PolicyKind kind);
bool is_learned(PolicyKind kind);

inline constexpr long long kDeskTimesteps = 100000;
inline constexpr long long kFullTimesteps = 500000;

struct ExperimentConfig {
  ClusterConfig cluster;
  WorkloadConfig workload;
  PpoConfig ppo;
  PolicyKind policy = PolicyKind::kRlE;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "runs/default";
  int eval_episodes = 20;
  std::uint64_t eval_seed = 1000;
  bool stochastic_eval = true;
};

// M=4, C=128, 100k timesteps; everything else at its documented default.
ExperimentConfig default_experiment_config();

// INI-style text:
//   [experiment] policy seed output_dir eval_episodes eval_seed stochastic_eval
//   [cluster]    num_nodes num_blocks node_capacity max_replication
//                initial_replication tau episode_length
//   [workload]   num_distributions zipf_exponent poisson_mean rotation_period
//   [ppo]        learning_rate total_timesteps rollout_horizon epochs_per_update
//                minibatch_size gamma gae_lambda clip_epsilon value_coef
//                entropy_coef max_grad_norm hidden_width
// Missing keys keep their defaults; unknown keys are an error. A missing tau
// defaults to (num_nodes / poisson_mean)^2. Comments start with ';'.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Canonical text form (every key, shortest round-trip numbers); parsing it
// reproduces the config exactly.
std::string format_experiment_config(const ExperimentConfig& config);

// Re-derives dependent fields (allow_erase from the policy, workload block
// count from the cluster) and validates every sub-config.
void finalize(ExperimentConfig& config);

}  // namespace replica

#endif  // REPLICA_EXPERIMENT_HPP_
