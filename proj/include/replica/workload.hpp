#ifndef REPLICA_WORKLOAD_HPP_
#define REPLICA_WORKLOAD_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "replica/random.hpp"

namespace replica {

struct WorkloadConfig {
  int num_blocks = 128;
  int num_distributions = 3;
  double zipf_exponent = 1.2;
  double poisson_mean = 200.0;
  int rotation_period = 1000;  // steps between hot-set changes; 0 disables rotation
  std::uint64_t seed = 0;
};

void validate(const WorkloadConfig& config);

// p(k) = k^-s / sum_j j^-s for ranks k = 1..num_blocks (index k-1).
std::vector<double> zipf_weights(int num_blocks, double exponent);

// Read-request generator: Poisson batch sizes, each request drawn from one of
// several Zipf popularity rankings chosen uniformly per request. Each ranking
// maps rank to block id through its own random permutation.
class Workload {
 public:
  explicit Workload(const WorkloadConfig& config);

  const WorkloadConfig& config() const { return config_; }

  std::vector<int> sample_request_batch();

  // Draws fresh rank->block permutations for every distribution.
  void rotate_hotsets();

  // Counts one step; rotates once rotation_period steps have elapsed.
  void advance_clock();

  // New hot sets and a restarted rotation clock (episode reset).
  void reset();

  const std::vector<std::vector<int>>& permutations() const { return permutations_; }
  std::span<const double> zipf_cdf() const { return zipf_cdf_; }
  int steps_since_rotation() const { return steps_since_rotation_; }

  // Per-block probability of one request under the current hot sets.
  std::vector<double> mixture_pmf() const;

  const Rng& rng() const { return rng_; }

 private:
  int sample_rank();

  WorkloadConfig config_;
  Rng rng_;
  std::vector<double> zipf_pmf_;
  std::vector<double> zipf_cdf_;
  std::vector<std::vector<int>> permutations_;
  int steps_since_rotation_ = 0;
};

}  // namespace replica

#endif  // REPLICA_WORKLOAD_HPP_
