#include "replica/baselines.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace replica {

std::optional<BaselineKind> parse_baseline(std::string_view name) {
  if (name == "static") return BaselineKind::kStatic;
  if (name == "random") return BaselineKind::kRandom;
  if (name == "greedy") return BaselineKind::kGreedyBalance;
  return std::nullopt;
}

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kStatic:
      return "static";
    case BaselineKind::kRandom:
      return "random";
    case BaselineKind::kGreedyBalance:
      return "greedy";
  }
  return "unknown";
}

int static_action(int num_nodes) {
  return encode_action(Action{ActionKind::kMove, 0, 0}, num_nodes);
}

int random_action(int num_nodes, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, num_actions(num_nodes) - 1);
  return pick(rng);
}

int greedy_balance_action(const ClusterState& state, const ClusterConfig& config,
                          std::span<const std::int64_t> load_vector) {
  const int m = config.num_nodes;
  if (static_cast<int>(load_vector.size()) != m) {
    throw std::invalid_argument("load vector length differs from num_nodes");
  }
  // max_element/min_element return the first extreme, i.e. the smallest index.
  const int busiest = static_cast<int>(std::max_element(load_vector.begin(), load_vector.end()) -
                                       load_vector.begin());
  const int idlest = static_cast<int>(std::min_element(load_vector.begin(), load_vector.end()) -
                                      load_vector.begin());
  const int no_op = static_action(m);
  if (busiest == idlest) return no_op;

  const std::optional<int> block = select_block(state, busiest);
  if (!block) return no_op;
  const bool accepts = !state.holds(*block, idlest) && state.node_fill(idlest) < config.node_capacity;
  if (!accepts) return no_op;
  if (state.replication(*block) < config.max_replication) {
    return encode_action(Action{ActionKind::kCopy, busiest, idlest}, m);
  }
  return encode_action(Action{ActionKind::kMove, busiest, idlest}, m);
}

int greedy_balance_action(const ClusterState& state, const ClusterConfig& config) {
  std::vector<std::int64_t> loads(state.num_nodes(), 0);
  for (int node = 0; node < state.num_nodes(); ++node) {
    for (int block = 0; block < state.num_blocks(); ++block) loads[node] += state.read_count(node, block);
  }
  return greedy_balance_action(state, config, loads);
}

}  // namespace replica
