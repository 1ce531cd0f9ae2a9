#ifndef REPLICA_BASELINES_HPP_
#define REPLICA_BASELINES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "replica/cluster.hpp"
#include "replica/random.hpp"

namespace replica {

// Non-learning reference policies. Static is fixed replication (HDFS default),
// Random is a sanity floor, GreedyBalance replicates the hottest block of the
// busiest node onto the idlest node.
enum class BaselineKind { kStatic, kRandom, kGreedyBalance };

std::optional<BaselineKind> parse_baseline(std::string_view name);
std::string_view baseline_name(BaselineKind kind);

// Move(0 -> 0): always ignored, so placement never changes.
int static_action(int num_nodes);

// Uniform over all 3 M^2 indices.
int random_action(int num_nodes, Rng& rng);

int greedy_balance_action(const ClusterState& state, const ClusterConfig& config,
                          std::span<const std::int64_t> load_vector);

// Same, with the load vector taken from the state's last-step read counts.
int greedy_balance_action(const ClusterState& state, const ClusterConfig& config);

}  // namespace replica

#endif  // REPLICA_BASELINES_HPP_
