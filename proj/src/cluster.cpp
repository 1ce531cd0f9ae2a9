#include "replica/cluster.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "replica/workload.hpp"

namespace replica {

void validate(const ClusterConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("cluster config: " + what); };
  if (c.num_nodes < 2) fail("num_nodes must be at least 2");
  if (c.num_blocks < 1) fail("num_blocks must be at least 1");
  if (c.node_capacity < 1) fail("node_capacity must be at least 1");
  if (c.initial_replication < 1) fail("initial_replication must be at least 1");
  if (c.initial_replication > c.max_replication) fail("initial_replication exceeds max_replication");
  if (c.initial_replication > c.num_nodes) fail("initial_replication exceeds num_nodes");
  if (static_cast<long long>(c.initial_replication) * c.num_blocks >
      static_cast<long long>(c.num_nodes) * c.node_capacity) {
    fail("initial placement does not fit: initial_replication * num_blocks > num_nodes * node_capacity");
  }
  if (!(c.tau > 0.0)) fail("tau must be positive");
  if (c.episode_length < 1) fail("episode_length must be at least 1");
}

double default_tau(int num_nodes, double poisson_mean) {
  const double per_node = poisson_mean / num_nodes;
  return 1.0 / (per_node * per_node);
}

int num_actions(int num_nodes) { return 3 * num_nodes * num_nodes; }

Action decode_action(int index, int num_nodes) {
  if (num_nodes < 1 || index < 0 || index >= num_actions(num_nodes)) {
    throw std::out_of_range("action index " + std::to_string(index) + " outside [0, " +
                            std::to_string(num_actions(num_nodes)) + ")");
  }
  const int square = num_nodes * num_nodes;
  const int rest = index % square;
  return Action{static_cast<ActionKind>(index / square), rest / num_nodes, rest % num_nodes};
}

int encode_action(const Action& action, int num_nodes) {
  if (action.from_node < 0 || action.from_node >= num_nodes || action.to_node < 0 ||
      action.to_node >= num_nodes) {
    throw std::out_of_range("action node outside [0, " + std::to_string(num_nodes) + ")");
  }
  return static_cast<int>(action.kind) * num_nodes * num_nodes + action.from_node * num_nodes +
         action.to_node;
}

std::string to_string(const Action& action) {
  static constexpr const char* kNames[] = {"copy", "remove", "move"};
  return std::string(kNames[static_cast<int>(action.kind)]) + "(" +
         std::to_string(action.from_node) + "->" + std::to_string(action.to_node) + ")";
}

ClusterState::ClusterState(int num_nodes, int num_blocks)
    : num_nodes_(num_nodes),
      num_blocks_(num_blocks),
      placement_(static_cast<std::size_t>(num_nodes) * num_blocks, 0),
      node_fill_(num_nodes, 0),
      replication_(num_blocks, 0),
      read_counts_(static_cast<std::size_t>(num_nodes) * num_blocks, 0) {}

void ClusterState::add_replica(int block, int node) {
  auto& cell = placement_[static_cast<std::size_t>(block) * num_nodes_ + node];
  if (cell) throw std::logic_error("block already stored on node");
  cell = 1;
  ++node_fill_[node];
  ++replication_[block];
}

void ClusterState::remove_replica(int block, int node) {
  auto& cell = placement_[static_cast<std::size_t>(block) * num_nodes_ + node];
  if (!cell) throw std::logic_error("block not stored on node");
  cell = 0;
  --node_fill_[node];
  --replication_[block];
  read_counts_[static_cast<std::size_t>(node) * num_blocks_ + block] = 0;
}

void ClusterState::set_read_count(int node, int block, std::uint32_t count) {
  read_counts_[static_cast<std::size_t>(node) * num_blocks_ + block] = count;
}

void ClusterState::set_read_counts(std::vector<std::uint32_t> counts) {
  if (counts.size() != read_counts_.size()) throw std::invalid_argument("read count matrix has wrong size");
  read_counts_ = std::move(counts);
}

namespace {

// Can `blocks_left` more blocks each get `replicas` distinct nodes? By max-flow
// the binding cut is the one containing every remaining block.
bool placeable(std::span<const int> free_slots, int blocks_left, int replicas) {
  long long room = 0;
  for (int slots : free_slots) room += std::min(slots, blocks_left);
  return room >= static_cast<long long>(replicas) * blocks_left;
}

}  // namespace

ClusterState init_cluster(const ClusterConfig& config, Rng& rng) {
  validate(config);
  const int m = config.num_nodes;
  const int r = config.initial_replication;
  ClusterState state(m, config.num_blocks);
  std::vector<int> free_slots(m, config.node_capacity);
  std::vector<int> candidates;
  std::vector<int> chosen(r);

  for (int block = 0; block < config.num_blocks; ++block) {
    const int blocks_left = config.num_blocks - block - 1;
    candidates.clear();
    for (int node = 0; node < m; ++node) {
      if (free_slots[node] > 0) candidates.push_back(node);
    }
    bool found = false;
    for (int attempt = 0; attempt < 64 && !found; ++attempt) {
      // partial Fisher-Yates: first r entries become a uniform r-subset
      for (int i = 0; i < r; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(candidates.size()) - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
      }
      std::copy_n(candidates.begin(), r, chosen.begin());
      for (int node : chosen) --free_slots[node];
      found = placeable(free_slots, blocks_left, r);
      if (!found) {
        for (int node : chosen) ++free_slots[node];
      }
    }
    if (!found) {
      // Largest remaining capacity first always preserves feasibility.
      std::stable_sort(candidates.begin(), candidates.end(),
                       [&](int a, int b) { return free_slots[a] > free_slots[b]; });
      std::copy_n(candidates.begin(), r, chosen.begin());
      for (int node : chosen) --free_slots[node];
    }
    for (int node : chosen) state.add_replica(block, node);
  }
  return state;
}

ClusterState init_cluster(const ClusterConfig& config, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kPlacement);
  return init_cluster(config, rng);
}

std::optional<int> select_block(const ClusterState& state, int from_node) {
  std::optional<int> best;
  std::uint32_t best_count = 0;
  for (int block = 0; block < state.num_blocks(); ++block) {
    if (!state.holds(block, from_node)) continue;
    const std::uint32_t count = state.read_count(from_node, block);
    if (!best || count > best_count) {
      best = block;
      best_count = count;
    }
  }
  return best;
}

bool apply_action(ClusterState& state, const ClusterConfig& config, const Action& action) {
  const std::optional<int> selected = select_block(state, action.from_node);
  if (!selected) return false;
  const int block = *selected;
  const int to = action.to_node;

  switch (action.kind) {
    case ActionKind::kCopy:
      if (state.holds(block, to) || state.node_fill(to) >= config.node_capacity ||
          state.replication(block) >= config.max_replication) {
        return false;
      }
      state.add_replica(block, to);
      return true;
    case ActionKind::kRemove:
      if (!config.allow_erase || state.replication(block) <= 1) return false;
      state.remove_replica(block, action.from_node);
      return true;
    case ActionKind::kMove:
      if (action.from_node == to || state.holds(block, to) ||
          state.node_fill(to) >= config.node_capacity) {
        return false;
      }
      state.add_replica(block, to);
      state.remove_replica(block, action.from_node);
      return true;
  }
  return false;
}

ServeResult serve_requests(const ClusterState& state, std::span<const int> requests, Rng& rng) {
  const int m = state.num_nodes();
  const int c = state.num_blocks();
  ServeResult result{std::vector<std::int64_t>(m, 0),
                     std::vector<std::uint32_t>(static_cast<std::size_t>(m) * c, 0)};
  std::vector<int> holders;
  holders.reserve(m);
  for (int block : requests) {
    if (block < 0 || block >= c) {
      throw std::out_of_range("request for unknown block " + std::to_string(block));
    }
    holders.clear();
    for (int node = 0; node < m; ++node) {
      if (state.holds(block, node)) holders.push_back(node);
    }
    if (holders.empty()) throw std::logic_error("block " + std::to_string(block) + " has no replica");
    int node = holders.front();
    if (holders.size() > 1) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(holders.size()) - 1);
      node = holders[pick(rng)];
    }
    ++result.load_vector[node];
    ++result.read_counts[static_cast<std::size_t>(node) * c + block];
  }
  return result;
}

double load_variance(std::span<const std::int64_t> loads) {
  if (loads.empty()) return 0.0;
  // Exact integer moments: M * sum(a^2) - (sum a)^2 is M^2 times the variance.
  const auto n = static_cast<std::int64_t>(loads.size());
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
  for (std::int64_t a : loads) {
    sum += a;
    sum_sq += a * a;
  }
  const std::int64_t scaled = n * sum_sq - sum * sum;
  return static_cast<double>(scaled) / static_cast<double>(n * n);
}

double compute_reward(std::span<const std::int64_t> loads, double tau) {
  return -tau * load_variance(loads);
}

StepResult step(ClusterState& state, const ClusterConfig& config, int action_index,
                Workload& workload, Rng& serve_rng) {
  const Action action = decode_action(action_index, config.num_nodes);
  StepResult result;
  result.action_applied = apply_action(state, config, action);

  const std::vector<int> requests = workload.sample_request_batch();
  ServeResult served = serve_requests(state, requests, serve_rng);
  result.requests_served = static_cast<std::int64_t>(requests.size());
  result.reward = compute_reward(served.load_vector, config.tau);
  result.load_vector = std::move(served.load_vector);
  result.raw_read_counts = served.read_counts;
  state.set_read_counts(std::move(served.read_counts));

  state.advance_step();
  workload.advance_clock();
  return result;
}

std::optional<std::string> find_invariant_violation(const ClusterState& state,
                                                    const ClusterConfig& config) {
  const int m = state.num_nodes();
  const int c = state.num_blocks();
  std::vector<int> column(m, 0);
  for (int block = 0; block < c; ++block) {
    int row = 0;
    for (int node = 0; node < m; ++node) {
      const std::uint8_t cell = state.placement()[static_cast<std::size_t>(block) * m + node];
      if (cell > 1) return "placement entry is not binary";
      row += cell;
      column[node] += cell;
    }
    if (row != state.replication(block)) return "cached replication count out of sync";
    if (row < 1) return "block " + std::to_string(block) + " lost";
    if (row > config.max_replication) {
      return "block " + std::to_string(block) + " above max replication";
    }
  }
  for (int node = 0; node < m; ++node) {
    if (column[node] != state.node_fill(node)) return "cached node fill out of sync";
    if (column[node] > config.node_capacity) {
      return "node " + std::to_string(node) + " over capacity";
    }
    for (int block = 0; block < c; ++block) {
      if (state.read_count(node, block) > 0 && !state.holds(block, node)) {
        return "reads recorded for a block the node does not hold";
      }
    }
  }
  return std::nullopt;
}

}  // namespace replica
