#include "replica/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace replica {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'R', 'P', 'L', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(T value) {
    out_.append(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void text(std::string_view s) {
    pod<std::uint64_t>(s.size());
    out_.append(s);
  }
  void row_major(const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) pod<double>(m(r, c));
  }
  void vec(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) pod<double>(v[i]);
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string text() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void row_major(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = pod<double>();
  }
  void vec(Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = pod<double>();
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw CheckpointError("checkpoint truncated");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.bytes().append(kMagic, sizeof(kMagic));
  w.pod<std::uint32_t>(ck.format_version);
  w.text(ck.config_text);
  const NetDims dims = ck.params.dims();
  w.pod<std::uint64_t>(dims.input);
  w.pod<std::uint64_t>(dims.hidden);
  w.pod<std::uint64_t>(dims.actions);
  w.row_major(ck.params.w1);
  w.vec(ck.params.b1);
  w.row_major(ck.params.wp);
  w.vec(ck.params.bp);
  w.vec(ck.params.wv);
  w.pod<double>(ck.params.bv);
  w.pod<std::uint64_t>(ck.env_rng_states.size());
  for (const auto& state : ck.env_rng_states) w.text(state);
  const std::uint64_t hash = fnv1a(w.bytes());
  w.pod<std::uint64_t>(hash);
  return std::move(w.bytes());
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  Reader r(bytes.substr(sizeof(kMagic)));
  Checkpoint ck;
  ck.format_version = r.pod<std::uint32_t>();
  if (ck.format_version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(ck.format_version) +
                          " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }
  ck.config_text = r.text();
  NetDims dims;
  const auto input = r.pod<std::uint64_t>();
  const auto hidden = r.pod<std::uint64_t>();
  const auto actions = r.pod<std::uint64_t>();
  constexpr std::uint64_t kLimit = 1ULL << 24;
  if (input == 0 || hidden == 0 || actions == 0 || input > kLimit || hidden > kLimit ||
      actions > kLimit) {
    throw CheckpointError("checkpoint dimension header is invalid");
  }
  dims.input = static_cast<int>(input);
  dims.hidden = static_cast<int>(hidden);
  dims.actions = static_cast<int>(actions);
  const std::uint64_t payload = 8 * (input * hidden + hidden + actions * hidden + actions + hidden + 1);
  if (payload > bytes.size()) throw CheckpointError("checkpoint truncated");

  ck.params = PolicyParams::zeros(dims);
  r.row_major(ck.params.w1);
  r.vec(ck.params.b1);
  r.row_major(ck.params.wp);
  r.vec(ck.params.bp);
  r.vec(ck.params.wv);
  ck.params.bv = r.pod<double>();
  const auto states = r.pod<std::uint64_t>();
  if (states > 64) throw CheckpointError("checkpoint generator-state count is invalid");
  for (std::uint64_t i = 0; i < states; ++i) ck.env_rng_states.push_back(r.text());

  const std::size_t hashed = sizeof(kMagic) + r.position();
  const auto stored = r.pod<std::uint64_t>();
  if (stored != fnv1a(bytes.substr(0, hashed))) throw CheckpointError("checkpoint checksum mismatch");
  if (sizeof(kMagic) + r.position() != bytes.size()) {
    throw CheckpointError("checkpoint has trailing bytes");
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str());
}

}  // namespace replica
