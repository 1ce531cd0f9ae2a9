#include "replica/environment.hpp"

#include <stdexcept>

#include "replica/observation.hpp"

namespace replica {

WorkloadConfig ReplicationEnv::seeded(WorkloadConfig workload, const ClusterConfig& cluster,
                                      std::uint64_t seed) {
  if (workload.num_blocks != cluster.num_blocks) {
    throw std::invalid_argument("workload and cluster disagree on num_blocks");
  }
  workload.seed = derive_seed(seed, Stream::kWorkload, 0);
  return workload;
}

ReplicationEnv::ReplicationEnv(const ClusterConfig& cluster, const WorkloadConfig& workload,
                               std::uint64_t seed)
    : cluster_(cluster),
      placement_rng_(make_rng(seed, Stream::kPlacement)),
      serve_rng_(make_rng(seed, Stream::kServe)),
      workload_(seeded(workload, cluster, seed)),
      state_(init_cluster(cluster_, placement_rng_)),
      count_scale_(default_count_scale(cluster.num_nodes, workload.poisson_mean)),
      last_loads_(cluster.num_nodes, 0) {}

void ReplicationEnv::reset() {
  state_ = init_cluster(cluster_, placement_rng_);
  workload_.reset();
  episode_step_ = 0;
  std::fill(last_loads_.begin(), last_loads_.end(), 0);
}

StepResult ReplicationEnv::step(int action_index) {
  StepResult result = replica::step(state_, cluster_, action_index, workload_, serve_rng_);
  ++episode_step_;
  last_loads_ = result.load_vector;
  return result;
}

std::vector<double> ReplicationEnv::observation() const {
  return encode_observation(state_, cluster_.node_capacity, count_scale_);
}

int ReplicationEnv::observation_size() const {
  return static_cast<int>(replica::observation_size(cluster_.num_nodes, cluster_.node_capacity,
                                                     cluster_.num_blocks));
}

std::vector<std::string> ReplicationEnv::rng_states() const {
  return {rng_state(placement_rng_), rng_state(serve_rng_), rng_state(workload_.rng())};
}

}  // namespace replica
