#ifndef REPLICA_CHECKPOINT_HPP_
#define REPLICA_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "replica/policy_net.hpp"

namespace replica {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout (little-endian):
//   magic "RPLCKPT\0" | u32 version | u64 n + config text
//   | u64 input, hidden, actions
//   | f64 w1 (row-major), b1, wp (row-major), bp, wv, bv
//   | u64 count, then count x (u64 n + generator state text)
//   | u64 FNV-1a hash of every preceding byte
struct Checkpoint {
  std::uint32_t format_version = kCheckpointVersion;
  std::string config_text;
  PolicyParams params;
  std::vector<std::string> env_rng_states;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace replica

#endif  // REPLICA_CHECKPOINT_HPP_
