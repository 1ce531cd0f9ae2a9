#include "replica/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace replica {

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  if (name == "rl_e") return PolicyKind::kRlE;
  if (name == "rl_ne") return PolicyKind::kRlNe;
  if (name == "static") return PolicyKind::kStatic;
  if (name == "random") return PolicyKind::kRandom;
  if (name == "greedy") return PolicyKind::kGreedy;
  return std::nullopt;
}

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kRlE:
      return "rl_e";
    case PolicyKind::kRlNe:
      return "rl_ne";
    case PolicyKind::kStatic:
      return "static";
    case PolicyKind::kRandom:
      return "random";
    case PolicyKind::kGreedy:
      return "greedy";
  }
  return "unknown";
}

bool is_learned(PolicyKind kind) { return kind == PolicyKind::kRlE || kind == PolicyKind::kRlNe; }

ExperimentConfig default_experiment_config() {
  ExperimentConfig config;
  config.ppo.total_timesteps = kDeskTimesteps;
  config.cluster.tau = default_tau(config.cluster.num_nodes, config.workload.poisson_mean);
  return config;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + text + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

template <typename T, typename Field>
Setter number(Field field) {
  return [field](ExperimentConfig& c, const std::string& key, const std::string& v) {
    field(c) = parse_number<T>(key, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.policy",
       [](ExperimentConfig& c, const std::string& key, const std::string& v) {
         const auto kind = parse_policy_kind(v);
         if (!kind) throw std::invalid_argument("config key '" + key + "': unknown policy '" + v + "'");
         c.policy = *kind;
       }},
      {"experiment.seed", number<std::uint64_t>([](ExperimentConfig& c) -> auto& { return c.seed; })},
      {"experiment.output_dir",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"experiment.eval_episodes",
       number<int>([](ExperimentConfig& c) -> auto& { return c.eval_episodes; })},
      {"experiment.eval_seed",
       number<std::uint64_t>([](ExperimentConfig& c) -> auto& { return c.eval_seed; })},
      {"experiment.stochastic_eval",
       [](ExperimentConfig& c, const std::string& key, const std::string& v) {
         c.stochastic_eval = parse_bool(key, v);
       }},
      {"cluster.num_nodes", number<int>([](ExperimentConfig& c) -> auto& { return c.cluster.num_nodes; })},
      {"cluster.num_blocks",
       number<int>([](ExperimentConfig& c) -> auto& { return c.cluster.num_blocks; })},
      {"cluster.node_capacity",
       number<int>([](ExperimentConfig& c) -> auto& { return c.cluster.node_capacity; })},
      {"cluster.max_replication",
       number<int>([](ExperimentConfig& c) -> auto& { return c.cluster.max_replication; })},
      {"cluster.initial_replication",
       number<int>([](ExperimentConfig& c) -> auto& { return c.cluster.initial_replication; })},
      {"cluster.tau", number<double>([](ExperimentConfig& c) -> auto& { return c.cluster.tau; })},
      {"cluster.episode_length",
       number<int>([](ExperimentConfig& c) -> auto& { return c.cluster.episode_length; })},
      {"workload.num_distributions",
       number<int>([](ExperimentConfig& c) -> auto& { return c.workload.num_distributions; })},
      {"workload.zipf_exponent",
       number<double>([](ExperimentConfig& c) -> auto& { return c.workload.zipf_exponent; })},
      {"workload.poisson_mean",
       number<double>([](ExperimentConfig& c) -> auto& { return c.workload.poisson_mean; })},
      {"workload.rotation_period",
       number<int>([](ExperimentConfig& c) -> auto& { return c.workload.rotation_period; })},
      {"ppo.learning_rate", number<double>([](ExperimentConfig& c) -> auto& { return c.ppo.learning_rate; })},
      {"ppo.total_timesteps",
       number<long long>([](ExperimentConfig& c) -> auto& { return c.ppo.total_timesteps; })},
      {"ppo.rollout_horizon",
       number<int>([](ExperimentConfig& c) -> auto& { return c.ppo.rollout_horizon; })},
      {"ppo.epochs_per_update",
       number<int>([](ExperimentConfig& c) -> auto& { return c.ppo.epochs_per_update; })},
      {"ppo.minibatch_size", number<int>([](ExperimentConfig& c) -> auto& { return c.ppo.minibatch_size; })},
      {"ppo.gamma", number<double>([](ExperimentConfig& c) -> auto& { return c.ppo.gamma; })},
      {"ppo.gae_lambda", number<double>([](ExperimentConfig& c) -> auto& { return c.ppo.gae_lambda; })},
      {"ppo.clip_epsilon", number<double>([](ExperimentConfig& c) -> auto& { return c.ppo.clip_epsilon; })},
      {"ppo.value_coef", number<double>([](ExperimentConfig& c) -> auto& { return c.ppo.value_coef; })},
      {"ppo.entropy_coef", number<double>([](ExperimentConfig& c) -> auto& { return c.ppo.entropy_coef; })},
      {"ppo.max_grad_norm", number<double>([](ExperimentConfig& c) -> auto& { return c.ppo.max_grad_norm; })},
      {"ppo.hidden_width", number<int>([](ExperimentConfig& c) -> auto& { return c.ppo.hidden_width; })},
  };
  return table;
}

std::string shortest(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }

  ExperimentConfig config = default_experiment_config();
  bool tau_given = false;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw std::invalid_argument("config key '" + section + "' must be inside a [section]");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end()) throw std::invalid_argument("unknown config key '" + full + "'");
      it->second(config, full, value.get_value<std::string>());
      if (full == "cluster.tau") tau_given = true;
    }
  }
  if (!tau_given) config.cluster.tau = default_tau(config.cluster.num_nodes, config.workload.poisson_mean);
  finalize(config);
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

std::string format_experiment_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n"
      << "policy = " << policy_name(c.policy) << "\n"
      << "seed = " << c.seed << "\n"
      << "output_dir = " << c.output_dir.string() << "\n"
      << "eval_episodes = " << c.eval_episodes << "\n"
      << "eval_seed = " << c.eval_seed << "\n"
      << "stochastic_eval = " << (c.stochastic_eval ? "true" : "false") << "\n\n"
      << "[cluster]\n"
      << "num_nodes = " << c.cluster.num_nodes << "\n"
      << "num_blocks = " << c.cluster.num_blocks << "\n"
      << "node_capacity = " << c.cluster.node_capacity << "\n"
      << "max_replication = " << c.cluster.max_replication << "\n"
      << "initial_replication = " << c.cluster.initial_replication << "\n"
      << "tau = " << shortest(c.cluster.tau) << "\n"
      << "episode_length = " << c.cluster.episode_length << "\n\n"
      << "[workload]\n"
      << "num_distributions = " << c.workload.num_distributions << "\n"
      << "zipf_exponent = " << shortest(c.workload.zipf_exponent) << "\n"
      << "poisson_mean = " << shortest(c.workload.poisson_mean) << "\n"
      << "rotation_period = " << c.workload.rotation_period << "\n\n"
      << "[ppo]\n"
      << "learning_rate = " << shortest(c.ppo.learning_rate) << "\n"
      << "total_timesteps = " << c.ppo.total_timesteps << "\n"
      << "rollout_horizon = " << c.ppo.rollout_horizon << "\n"
      << "epochs_per_update = " << c.ppo.epochs_per_update << "\n"
      << "minibatch_size = " << c.ppo.minibatch_size << "\n"
      << "gamma = " << shortest(c.ppo.gamma) << "\n"
      << "gae_lambda = " << shortest(c.ppo.gae_lambda) << "\n"
      << "clip_epsilon = " << shortest(c.ppo.clip_epsilon) << "\n"
      << "value_coef = " << shortest(c.ppo.value_coef) << "\n"
      << "entropy_coef = " << shortest(c.ppo.entropy_coef) << "\n"
      << "max_grad_norm = " << shortest(c.ppo.max_grad_norm) << "\n"
      << "hidden_width = " << c.ppo.hidden_width << "\n";
  return out.str();
}

void finalize(ExperimentConfig& c) {
  c.cluster.allow_erase = c.policy != PolicyKind::kRlNe;
  c.workload.num_blocks = c.cluster.num_blocks;
  c.workload.seed = c.seed;
  validate(c.cluster);
  validate(c.workload);
  validate(c.ppo);
  if (c.eval_episodes < 1) throw std::invalid_argument("experiment: eval_episodes must be positive");
}

}  // namespace replica
