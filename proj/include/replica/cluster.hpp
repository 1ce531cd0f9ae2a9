#ifndef REPLICA_CLUSTER_HPP_
#define REPLICA_CLUSTER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "replica/random.hpp"

namespace replica {

class Workload;

struct ClusterConfig {
  int num_nodes = 4;            // M
  int num_blocks = 128;         // C
  int node_capacity = 120;      // B, max blocks per node
  int max_replication = 5;
  int initial_replication = 3;
  double tau = 0.0004;          // reward normalizer
  int episode_length = 256;
  bool allow_erase = true;      // false: Remove is always ignored
};

// Throws std::invalid_argument naming the first violated constraint.
void validate(const ClusterConfig& config);

// (M / lambda)^2: turns the load variance into a squared coefficient of
// variation of per-node load.
double default_tau(int num_nodes, double poisson_mean);

enum class ActionKind : std::uint8_t { kCopy = 0, kRemove = 1, kMove = 2 };

struct Action {
  ActionKind kind = ActionKind::kCopy;
  int from_node = 0;
  int to_node = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

// 3 * M^2.
int num_actions(int num_nodes);

// index = kind * M^2 + from * M + to. Throws std::out_of_range.
Action decode_action(int index, int num_nodes);
int encode_action(const Action& action, int num_nodes);

std::string to_string(const Action& action);

// Placement, per-node fill and the read counts of the most recent step.
// Mutators keep the cached fill/replication counts consistent with the
// placement matrix; capacity and replication limits are enforced by
// apply_action, not here.
class ClusterState {
 public:
  ClusterState(int num_nodes, int num_blocks);

  int num_nodes() const { return num_nodes_; }
  int num_blocks() const { return num_blocks_; }

  bool holds(int block, int node) const {
    return placement_[static_cast<std::size_t>(block) * num_nodes_ + node] != 0;
  }
  int replication(int block) const { return replication_[block]; }
  int node_fill(int node) const { return node_fill_[node]; }
  std::uint32_t read_count(int node, int block) const {
    return read_counts_[static_cast<std::size_t>(node) * num_blocks_ + block];
  }

  // C x M, row-major: row b is the node-indicator vector of block b.
  std::span<const std::uint8_t> placement() const { return placement_; }
  // M x C, row-major.
  std::span<const std::uint32_t> last_read_counts() const { return read_counts_; }

  std::int64_t step_index() const { return step_index_; }

  void add_replica(int block, int node);
  void remove_replica(int block, int node);
  void set_read_count(int node, int block, std::uint32_t count);
  void set_read_counts(std::vector<std::uint32_t> counts);
  void advance_step() { ++step_index_; }

 private:
  int num_nodes_;
  int num_blocks_;
  std::vector<std::uint8_t> placement_;
  std::vector<int> node_fill_;
  std::vector<int> replication_;
  std::vector<std::uint32_t> read_counts_;
  std::int64_t step_index_ = 0;
};

// Places every block on initial_replication distinct nodes, chosen at random
// among nodes that keep the remaining blocks placeable.
ClusterState init_cluster(const ClusterConfig& config, Rng& rng);
ClusterState init_cluster(const ClusterConfig& config, std::uint64_t seed);

// Hottest block on `from_node` by last-step read count, smallest id on ties.
std::optional<int> select_block(const ClusterState& state, int from_node);

// Applies the action to the hottest block of from_node. Returns false and
// leaves the state untouched when the action would break a placement rule.
bool apply_action(ClusterState& state, const ClusterConfig& config, const Action& action);

struct ServeResult {
  std::vector<std::int64_t> load_vector;      // per node
  std::vector<std::uint32_t> read_counts;     // M x C, row-major
};

// Each request goes to a replica holder chosen uniformly at random.
ServeResult serve_requests(const ClusterState& state, std::span<const int> requests, Rng& rng);

// Population variance of the per-node loads.
double load_variance(std::span<const std::int64_t> loads);

// -tau * load_variance(loads).
double compute_reward(std::span<const std::int64_t> loads, double tau);

struct StepResult {
  std::vector<std::int64_t> load_vector;
  double reward = 0.0;
  bool action_applied = false;
  std::vector<std::uint32_t> raw_read_counts;
  std::int64_t requests_served = 0;
};

// One discrete step: act, sample and serve reads, score, record reads for the
// next observation, advance clocks.
StepResult step(ClusterState& state, const ClusterConfig& config, int action_index,
                Workload& workload, Rng& serve_rng);

// Empty when all structural invariants hold; otherwise a description of the
// first violation.
std::optional<std::string> find_invariant_violation(const ClusterState& state,
                                                    const ClusterConfig& config);

}  // namespace replica

#endif  // REPLICA_CLUSTER_HPP_
