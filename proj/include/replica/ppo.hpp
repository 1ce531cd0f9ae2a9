#ifndef REPLICA_PPO_HPP_
#define REPLICA_PPO_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "replica/cluster.hpp"
#include "replica/environment.hpp"
#include "replica/policy_net.hpp"
#include "replica/random.hpp"
#include "replica/workload.hpp"

namespace replica {

struct PpoConfig {
  double learning_rate = 0.001;
  long long total_timesteps = 500000;
  int rollout_horizon = 2048;
  int epochs_per_update = 4;
  int minibatch_size = 256;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  int hidden_width = 128;
};

void validate(const PpoConfig& config);

// Maps policy-head outputs onto environment action indices. Without erase the
// head only covers Copy and Move (2 M^2 outputs).
class ActionSpace {
 public:
  ActionSpace(int num_nodes, bool allow_erase);

  int size() const;
  int to_env_index(int head_index) const;
  bool allow_erase() const { return allow_erase_; }

 private:
  int num_nodes_;
  bool allow_erase_;
};

// One rollout of `horizon` consecutive transitions. Observation columns line
// up with the per-step vectors.
struct RolloutBatch {
  Eigen::MatrixXd observations;  // input x horizon
  std::vector<int> actions;      // policy-head indices
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> variances;  // per-step load variance
  std::vector<std::uint8_t> applied;
  double bootstrap_value = 0.0;  // V of the state after the last step, 0 if it ended an episode
  std::vector<double> advantages;
  std::vector<double> returns;

  int size() const { return static_cast<int>(actions.size()); }
};

// Runs the current policy for `horizon` steps, resetting the environment at
// every episode boundary (recorded as done).
RolloutBatch collect_rollout(ReplicationEnv& env, const PolicyParams& params,
                             const ActionSpace& space, int horizon, Rng& rng);

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation; returns = advantages + values.
Advantages compute_gae(std::span<const double> rewards, std::span<const double> values,
                       std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                       double lambda);

// In place: zero mean, unit (population) standard deviation.
void normalize_advantages(std::span<double> advantages);

// Clipped-surrogate PPO loss over a minibatch and its gradient:
//   policy  = -mean(min(rho A, clip(rho, 1-eps, 1+eps) A))
//   value   = mean((V - R)^2)
//   total   = policy + value_coef * value - entropy_coef * mean entropy
struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  PolicyGradients gradients;
};

LossTerms ppo_loss(const PolicyParams& params, const Eigen::Ref<const Eigen::MatrixXd>& observations,
                   std::span<const int> actions, std::span<const double> old_log_probs,
                   std::span<const double> advantages, std::span<const double> returns,
                   const PpoConfig& config);

// Scales the gradient down to `max_norm` (global L2) when it is larger.
// Returns the norm before clipping.
double clip_gradient_norm(PolicyGradients& gradients, double max_norm);

class Adam {
 public:
  Adam(const NetDims& dims, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-5);

  void step(PolicyParams& params, const PolicyGradients& gradients);
  long long iterations() const { return t_; }

 private:
  PolicyParams m_;
  PolicyParams v_;
  double lr_;
  double beta1_;
  double beta2_;
  double epsilon_;
  long long t_ = 0;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Several epochs of shuffled minibatch steps on a batch whose advantages and
// returns are already filled in. Throws NonFiniteError on divergence.
UpdateStats ppo_update(PolicyParams& params, Adam& optimizer, const RolloutBatch& batch,
                       const PpoConfig& config, Rng& shuffle_rng);

struct MetricsRow {
  long long timestep = 0;
  double mean_reward = 0.0;
  double mean_variance = 0.0;
  double entropy = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double wall_seconds = 0.0;
};

struct TrainSetup {
  ClusterConfig cluster;
  WorkloadConfig workload;
  PpoConfig ppo;
  std::uint64_t seed = 0;
};

struct TrainResult {
  PolicyParams params;
  std::vector<MetricsRow> metrics;
  std::vector<std::string> env_rng_states;
};

// Training stopped on a non-finite loss or gradient; metrics up to the failing
// update are kept.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::vector<MetricsRow> partial)
      : std::runtime_error(what), metrics(std::move(partial)) {}
  std::vector<MetricsRow> metrics;
};

// floor(total_timesteps / rollout_horizon).
long long num_updates(const PpoConfig& config);

using MetricsCallback = std::function<void(const MetricsRow&)>;

TrainResult train(const TrainSetup& setup, const MetricsCallback& on_update = {});

}  // namespace replica

#endif  // REPLICA_PPO_HPP_
