#include "replica/random.hpp"

#include <sstream>
#include <stdexcept>

namespace replica {

namespace {

std::seed_seq make_seq(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                       static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                       static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
}

}  // namespace

Rng make_rng(std::uint64_t seed, Stream stream) {
  auto seq = make_seq(seed, static_cast<std::uint64_t>(stream), 0);
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
  auto seq = make_seq(seed, static_cast<std::uint64_t>(stream), index + 1);
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

std::string rng_state(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng rng_from_state(const std::string& state) {
  std::istringstream in(state);
  Rng rng;
  in >> rng;
  if (in.fail()) throw std::invalid_argument("malformed generator state");
  return rng;
}

}  // namespace replica
