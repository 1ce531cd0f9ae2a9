#include "replica/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace replica {

void validate(const PpoConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("ppo config: " + what); };
  if (!(c.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (c.total_timesteps < 1) fail("total_timesteps must be positive");
  if (c.rollout_horizon < 1) fail("rollout_horizon must be positive");
  if (c.epochs_per_update < 1) fail("epochs_per_update must be positive");
  if (c.minibatch_size < 1 || c.minibatch_size > c.rollout_horizon) {
    fail("minibatch_size must be in [1, rollout_horizon]");
  }
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) fail("gae_lambda must be in [0, 1]");
  if (!(c.clip_epsilon > 0.0 && c.clip_epsilon < 1.0)) fail("clip_epsilon must be in (0, 1)");
  if (c.value_coef < 0.0 || c.entropy_coef < 0.0) fail("loss coefficients must be non-negative");
  if (!(c.max_grad_norm > 0.0)) fail("max_grad_norm must be positive");
  if (c.hidden_width < 1) fail("hidden_width must be positive");
}

ActionSpace::ActionSpace(int num_nodes, bool allow_erase)
    : num_nodes_(num_nodes), allow_erase_(allow_erase) {}

int ActionSpace::size() const { return (allow_erase_ ? 3 : 2) * num_nodes_ * num_nodes_; }

int ActionSpace::to_env_index(int head_index) const {
  if (head_index < 0 || head_index >= size()) throw std::out_of_range("policy head index out of range");
  const int square = num_nodes_ * num_nodes_;
  // Without erase the head is [Copy block | Move block]; skip the Remove block.
  if (!allow_erase_ && head_index >= square) return head_index + square;
  return head_index;
}

RolloutBatch collect_rollout(ReplicationEnv& env, const PolicyParams& params,
                             const ActionSpace& space, int horizon, Rng& rng) {
  RolloutBatch batch;
  batch.observations.resize(env.observation_size(), horizon);
  batch.actions.reserve(horizon);
  batch.log_probs.reserve(horizon);
  batch.rewards.reserve(horizon);
  batch.values.reserve(horizon);
  batch.dones.reserve(horizon);
  batch.variances.reserve(horizon);
  batch.applied.reserve(horizon);

  for (int t = 0; t < horizon; ++t) {
    const std::vector<double> obs = env.observation();
    batch.observations.col(t) = Eigen::Map<const Eigen::VectorXd>(obs.data(), obs.size());
    const ActionDistribution dist = forward(params, obs);
    const auto [head, log_prob] = sample_action(dist, rng);
    const StepResult result = env.step(space.to_env_index(head));

    batch.actions.push_back(head);
    batch.log_probs.push_back(log_prob);
    batch.values.push_back(dist.value);
    batch.rewards.push_back(result.reward);
    batch.variances.push_back(load_variance(result.load_vector));
    batch.applied.push_back(result.action_applied ? 1 : 0);
    const bool done = env.episode_done();
    batch.dones.push_back(done ? 1 : 0);
    if (done) env.reset();
  }
  batch.bootstrap_value = batch.dones.back() ? 0.0 : forward(params, env.observation()).value;
  return batch;
}

Advantages compute_gae(std::span<const double> rewards, std::span<const double> values,
                       std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                       double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("compute_gae: rewards, values and dones differ in length");
  }
  Advantages out{std::vector<double>(n), std::vector<double>(n)};
  double next_value = bootstrap_value;
  double next_advantage = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    next_advantage = delta + gamma * lambda * live * next_advantage;
    out.advantages[i] = next_advantage;
    out.returns[i] = next_advantage + values[i];
    next_value = values[i];
  }
  return out;
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.size() < 2) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double sq = 0.0;
  for (double a : advantages) sq += (a - mean) * (a - mean);
  const double std_dev = std::sqrt(sq / n);
  for (double& a : advantages) a = (a - mean) / (std_dev + 1e-12);
}

LossTerms ppo_loss(const PolicyParams& params, const Eigen::Ref<const Eigen::MatrixXd>& observations,
                   std::span<const int> actions, std::span<const double> old_log_probs,
                   std::span<const double> advantages, std::span<const double> returns,
                   const PpoConfig& config) {
  const Eigen::Index n = observations.cols();
  if (static_cast<Eigen::Index>(actions.size()) != n ||
      static_cast<Eigen::Index>(old_log_probs.size()) != n ||
      static_cast<Eigen::Index>(advantages.size()) != n ||
      static_cast<Eigen::Index>(returns.size()) != n) {
    throw std::invalid_argument("ppo_loss: minibatch arrays differ in length");
  }
  const ForwardCache cache = forward_batch(params, observations);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double eps = config.clip_epsilon;

  OutputGradient upstream{Eigen::MatrixXd::Zero(cache.log_probs.rows(), n), Eigen::VectorXd(n)};
  LossTerms terms;
  long long clipped = 0;

  for (Eigen::Index j = 0; j < n; ++j) {
    const auto log_probs = cache.log_probs.col(j);
    const Eigen::ArrayXd probs = log_probs.array().exp();
    const int a = actions[j];
    const double ratio = std::exp(log_probs[a] - old_log_probs[j]);
    const double adv = advantages[j];
    const double unclipped = ratio * adv;
    const double clipped_ratio = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double surrogate_clipped = clipped_ratio * adv;
    if (std::abs(ratio - 1.0) > eps) ++clipped;

    auto d_logits = upstream.logits.col(j);
    if (unclipped <= surrogate_clipped) {
      terms.policy -= unclipped;
      // d(-rho A)/d log p_a = -rho A; d log p_a / d z = e_a - p
      const double coef = -unclipped * inv_n;
      d_logits = -coef * probs.matrix();
      d_logits[a] += coef;
    } else {
      terms.policy -= surrogate_clipped;
    }

    double h = 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
      if (probs[k] > 0.0) h -= probs[k] * log_probs[k];
    }
    terms.entropy += h;
    // dH/dz_k = -p_k (log p_k + H)
    const double ent_coef = config.entropy_coef * inv_n;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
      if (probs[k] > 0.0) d_logits[k] += ent_coef * probs[k] * (log_probs[k] + h);
    }

    const double err = cache.values[j] - returns[j];
    terms.value += err * err;
    upstream.values[j] = 2.0 * config.value_coef * err * inv_n;
  }

  terms.policy *= inv_n;
  terms.value *= inv_n;
  terms.entropy *= inv_n;
  terms.clip_fraction = static_cast<double>(clipped) * inv_n;
  terms.total = terms.policy + config.value_coef * terms.value - config.entropy_coef * terms.entropy;
  if (!std::isfinite(terms.total)) throw NonFiniteError("non-finite PPO loss");
  terms.gradients = backward(params, observations, cache, upstream);
  return terms;
}

double clip_gradient_norm(PolicyGradients& gradients, double max_norm) {
  double sq = 0.0;
  for (const auto& t : gradients.tensors()) sq += t.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / (norm + 1e-12);
    for (auto t : gradients.tensors()) t *= scale;
  }
  return norm;
}

Adam::Adam(const NetDims& dims, double learning_rate, double beta1, double beta2, double epsilon)
    : m_(PolicyParams::zeros(dims)),
      v_(PolicyParams::zeros(dims)),
      lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {}

void Adam::step(PolicyParams& params, const PolicyGradients& gradients) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = params.tensors();
  const auto g = gradients.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
    v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i].cwiseProduct(g[i]);
    p[i].array() -= lr_ * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + epsilon_);
  }
}

UpdateStats ppo_update(PolicyParams& params, Adam& optimizer, const RolloutBatch& batch,
                       const PpoConfig& config, Rng& shuffle_rng) {
  const int n = batch.size();
  if (static_cast<int>(batch.advantages.size()) != n || static_cast<int>(batch.returns.size()) != n) {
    throw std::invalid_argument("ppo_update: batch has no advantages/returns");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  int minibatches = 0;
  Eigen::MatrixXd obs;
  std::vector<int> actions;
  std::vector<double> old_log_probs, advantages, returns;

  for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (int start = 0; start < n; start += config.minibatch_size) {
      const int size = std::min(config.minibatch_size, n - start);
      obs.resize(batch.observations.rows(), size);
      actions.resize(size);
      old_log_probs.resize(size);
      advantages.resize(size);
      returns.resize(size);
      for (int k = 0; k < size; ++k) {
        const int i = order[start + k];
        obs.col(k) = batch.observations.col(i);
        actions[k] = batch.actions[i];
        old_log_probs[k] = batch.log_probs[i];
        advantages[k] = batch.advantages[i];
        returns[k] = batch.returns[i];
      }
      LossTerms terms = ppo_loss(params, obs, actions, old_log_probs, advantages, returns, config);
      clip_gradient_norm(terms.gradients, config.max_grad_norm);
      optimizer.step(params, terms.gradients);

      stats.policy_loss += terms.policy;
      stats.value_loss += terms.value;
      stats.entropy += terms.entropy;
      stats.clip_fraction += terms.clip_fraction;
      ++minibatches;
    }
  }
  for (const auto& t : params.tensors()) {
    if (!t.allFinite()) throw NonFiniteError("non-finite parameters after update");
  }
  stats.policy_loss /= minibatches;
  stats.value_loss /= minibatches;
  stats.entropy /= minibatches;
  stats.clip_fraction /= minibatches;
  return stats;
}

long long num_updates(const PpoConfig& config) {
  return config.total_timesteps / config.rollout_horizon;
}

TrainResult train(const TrainSetup& setup, const MetricsCallback& on_update) {
  validate(setup.cluster);
  validate(setup.workload);
  validate(setup.ppo);
  const auto started = std::chrono::steady_clock::now();

  ReplicationEnv env(setup.cluster, setup.workload, setup.seed);
  const ActionSpace space(setup.cluster.num_nodes, setup.cluster.allow_erase);
  const NetDims dims{env.observation_size(), setup.ppo.hidden_width, space.size()};

  TrainResult result{init_params(dims, setup.seed), {}, {}};
  Adam optimizer(dims, setup.ppo.learning_rate);
  Rng action_rng = make_rng(setup.seed, Stream::kActionSampling);
  Rng shuffle_rng = make_rng(setup.seed, Stream::kShuffle);

  const long long updates = num_updates(setup.ppo);
  for (long long u = 0; u < updates; ++u) {
    try {
      RolloutBatch batch =
          collect_rollout(env, result.params, space, setup.ppo.rollout_horizon, action_rng);
      Advantages adv = compute_gae(batch.rewards, batch.values, batch.dones, batch.bootstrap_value,
                                   setup.ppo.gamma, setup.ppo.gae_lambda);
      batch.returns = std::move(adv.returns);
      batch.advantages = std::move(adv.advantages);
      normalize_advantages(batch.advantages);

      const UpdateStats stats = ppo_update(result.params, optimizer, batch, setup.ppo, shuffle_rng);

      MetricsRow row;
      row.timestep = (u + 1) * static_cast<long long>(setup.ppo.rollout_horizon);
      row.mean_reward =
          std::accumulate(batch.rewards.begin(), batch.rewards.end(), 0.0) / batch.size();
      row.mean_variance =
          std::accumulate(batch.variances.begin(), batch.variances.end(), 0.0) / batch.size();
      row.entropy = stats.entropy;
      row.policy_loss = stats.policy_loss;
      row.value_loss = stats.value_loss;
      row.clip_fraction = stats.clip_fraction;
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      result.metrics.push_back(row);
      if (on_update) on_update(row);
    } catch (const NonFiniteError& e) {
      throw TrainingDiverged(std::string("training diverged at update ") + std::to_string(u + 1) +
                                 ": " + e.what(),
                             result.metrics);
    }
  }
  result.env_rng_states = env.rng_states();
  return result;
}

}  // namespace replica
