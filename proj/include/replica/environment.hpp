#ifndef REPLICA_ENVIRONMENT_HPP_
#define REPLICA_ENVIRONMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "replica/cluster.hpp"
#include "replica/workload.hpp"

namespace replica {

// Episodic wrapper around the cluster simulator: owns the state, the workload
// and the generator used to route reads. Reset draws a new placement and new
// hot sets; everything is reproducible from the constructor seed.
class ReplicationEnv {
 public:
  ReplicationEnv(const ClusterConfig& cluster, const WorkloadConfig& workload, std::uint64_t seed);

  void reset();
  StepResult step(int action_index);

  std::vector<double> observation() const;
  bool episode_done() const { return episode_step_ >= cluster_.episode_length; }
  int episode_step() const { return episode_step_; }

  int observation_size() const;
  int num_actions() const { return replica::num_actions(cluster_.num_nodes); }

  const ClusterState& state() const { return state_; }
  const ClusterConfig& cluster_config() const { return cluster_; }
  const WorkloadConfig& workload_config() const { return workload_.config(); }
  const Workload& workload() const { return workload_; }
  const std::vector<std::int64_t>& last_load_vector() const { return last_loads_; }

  // Generator states (placement, serve, workload) in text form.
  std::vector<std::string> rng_states() const;

 private:
  static WorkloadConfig seeded(WorkloadConfig workload, const ClusterConfig& cluster,
                               std::uint64_t seed);

  ClusterConfig cluster_;
  Rng placement_rng_;
  Rng serve_rng_;
  Workload workload_;
  ClusterState state_;
  double count_scale_;
  int episode_step_ = 0;
  std::vector<std::int64_t> last_loads_;
};

}  // namespace replica

#endif  // REPLICA_ENVIRONMENT_HPP_
