#ifndef REPLICA_RANDOM_HPP_
#define REPLICA_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string>

namespace replica {

using Rng = std::mt19937_64;

// Named sub-streams derived from one experiment seed. Every consumer of
// randomness owns its own generator so that, e.g., the request stream does not
// depend on which policy is acting.
enum class Stream : std::uint64_t {
  kPlacement = 1,
  kServe = 2,
  kWorkload = 3,
  kPolicyInit = 4,
  kActionSampling = 5,
  kShuffle = 6,
  kBaseline = 7,
  kEvaluation = 8,
};

Rng make_rng(std::uint64_t seed, Stream stream);

// Seed for a child object (e.g. the environment of evaluation episode `index`).
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index);

// Text form of the full generator state, as produced by operator<<.
std::string rng_state(const Rng& rng);
Rng rng_from_state(const std::string& state);

}  // namespace replica

#endif  // REPLICA_RANDOM_HPP_
