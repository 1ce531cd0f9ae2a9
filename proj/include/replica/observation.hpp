#ifndef REPLICA_OBSERVATION_HPP_
#define REPLICA_OBSERVATION_HPP_

#include <cstddef>
#include <vector>

#include "replica/cluster.hpp"

namespace replica {

// M * (B + C).
std::size_t observation_size(int num_nodes, int node_capacity, int num_blocks);

// Divisor applied to read counts: the expected per-node load lambda / M.
double default_count_scale(int num_nodes, double poisson_mean);

// M x B, row-major. Row m holds the last-step read counts of the blocks on
// node m in non-increasing order, zero-padded to B, divided by count_scale.
std::vector<double> encode_node_matrix(const ClusterState& state, int node_capacity,
                                       double count_scale = 1.0);

// C x M, row-major copy of the placement matrix as 0/1 values.
std::vector<double> encode_placement_matrix(const ClusterState& state);

// Node matrix followed by placement matrix, both flattened row-major.
std::vector<double> encode_observation(const ClusterState& state, int node_capacity,
                                       double count_scale);

}  // namespace replica

#endif  // REPLICA_OBSERVATION_HPP_
