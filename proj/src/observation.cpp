#include "replica/observation.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace replica {

std::size_t observation_size(int num_nodes, int node_capacity, int num_blocks) {
  return static_cast<std::size_t>(num_nodes) *
         (static_cast<std::size_t>(node_capacity) + static_cast<std::size_t>(num_blocks));
}

double default_count_scale(int num_nodes, double poisson_mean) { return poisson_mean / num_nodes; }

namespace {

void write_node_rows(const ClusterState& state, int node_capacity, double count_scale,
                     double* out) {
  std::vector<std::uint32_t> row;
  row.reserve(node_capacity);
  for (int node = 0; node < state.num_nodes(); ++node) {
    row.clear();
    for (int block = 0; block < state.num_blocks(); ++block) {
      if (state.holds(block, node)) row.push_back(state.read_count(node, block));
    }
    if (static_cast<int>(row.size()) > node_capacity) {
      throw std::logic_error("node holds more blocks than its capacity");
    }
    std::sort(row.begin(), row.end(), std::greater<>());
    double* dst = out + static_cast<std::size_t>(node) * node_capacity;
    std::fill(dst, dst + node_capacity, 0.0);
    for (std::size_t j = 0; j < row.size(); ++j) dst[j] = row[j] / count_scale;
  }
}

}  // namespace

std::vector<double> encode_node_matrix(const ClusterState& state, int node_capacity,
                                       double count_scale) {
  std::vector<double> matrix(static_cast<std::size_t>(state.num_nodes()) * node_capacity);
  write_node_rows(state, node_capacity, count_scale, matrix.data());
  return matrix;
}

std::vector<double> encode_placement_matrix(const ClusterState& state) {
  const auto placement = state.placement();
  return std::vector<double>(placement.begin(), placement.end());
}

std::vector<double> encode_observation(const ClusterState& state, int node_capacity,
                                       double count_scale) {
  const std::size_t node_part = static_cast<std::size_t>(state.num_nodes()) * node_capacity;
  std::vector<double> values(node_part + state.placement().size());
  write_node_rows(state, node_capacity, count_scale, values.data());
  std::copy(state.placement().begin(), state.placement().end(), values.begin() + node_part);
  return values;
}

}  // namespace replica
