#include "replica/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace replica {

void validate(const WorkloadConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("workload config: " + what); };
  if (c.num_blocks < 1) fail("num_blocks must be at least 1");
  if (c.num_distributions < 1) fail("num_distributions must be at least 1");
  if (!(c.zipf_exponent > 0.0)) fail("zipf_exponent must be positive");
  if (!(c.poisson_mean > 0.0)) fail("poisson_mean must be positive");
  if (c.rotation_period < 0) fail("rotation_period must be non-negative (0 disables rotation)");
}

std::vector<double> zipf_weights(int num_blocks, double exponent) {
  std::vector<double> weights(num_blocks);
  for (int k = 0; k < num_blocks; ++k) weights[k] = std::pow(static_cast<double>(k + 1), -exponent);
  // Sum smallest-first for accuracy.
  const double total = std::accumulate(weights.rbegin(), weights.rend(), 0.0);
  for (double& w : weights) w /= total;
  return weights;
}

Workload::Workload(const WorkloadConfig& config)
    : config_(config), rng_(make_rng(config.seed, Stream::kWorkload)) {
  validate(config_);
  zipf_pmf_ = zipf_weights(config_.num_blocks, config_.zipf_exponent);
  zipf_cdf_.resize(zipf_pmf_.size());
  std::partial_sum(zipf_pmf_.begin(), zipf_pmf_.end(), zipf_cdf_.begin());
  zipf_cdf_.back() = 1.0;
  permutations_.assign(config_.num_distributions, std::vector<int>(config_.num_blocks));
  rotate_hotsets();
}

void Workload::rotate_hotsets() {
  for (auto& permutation : permutations_) {
    std::iota(permutation.begin(), permutation.end(), 0);
    std::shuffle(permutation.begin(), permutation.end(), rng_);
  }
  steps_since_rotation_ = 0;
}

void Workload::advance_clock() {
  ++steps_since_rotation_;
  if (config_.rotation_period > 0 && steps_since_rotation_ >= config_.rotation_period) {
    rotate_hotsets();
  }
}

void Workload::reset() { rotate_hotsets(); }

int Workload::sample_rank() {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  const auto it = std::upper_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - zipf_cdf_.begin(), config_.num_blocks - 1));
}

std::vector<int> Workload::sample_request_batch() {
  std::poisson_distribution<int> batch_size(config_.poisson_mean);
  std::uniform_int_distribution<int> which(0, config_.num_distributions - 1);
  const int n = batch_size(rng_);
  std::vector<int> batch(n);
  for (int& block : batch) {
    const int d = which(rng_);
    block = permutations_[d][sample_rank()];
  }
  return batch;
}

std::vector<double> Workload::mixture_pmf() const {
  std::vector<double> pmf(config_.num_blocks, 0.0);
  const double share = 1.0 / config_.num_distributions;
  for (const auto& permutation : permutations_) {
    for (int rank = 0; rank < config_.num_blocks; ++rank) {
      pmf[permutation[rank]] += share * zipf_pmf_[rank];
    }
  }
  return pmf;
}

}  // namespace replica
