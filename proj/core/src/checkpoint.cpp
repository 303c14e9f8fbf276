#include "grlp/checkpoint.hpp"

#include "grlp/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace grlp {
namespace {

constexpr char kMagic[4] = {'G', 'R', 'L', 'P'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) { out_.append(static_cast<const char*>(data), n); }

  template <typename T>
  void scalar(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    bytes(buf, sizeof(T));
  }

  void string(std::string_view s) {
    scalar(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  void bytes(void* dst, std::size_t n) {
    if (n > in_.size() - pos_) throw Error(ErrorKind::integrity, "checkpoint is truncated");
    std::memcpy(dst, in_.data() + pos_, n);
    pos_ += n;
  }

  template <typename T>
  T scalar() {
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::string string() {
    const auto n = scalar<std::uint32_t>();
    if (n > in_.size() - pos_) throw Error(ErrorKind::integrity, "checkpoint is truncated");
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t Checkpoint::config_digest() const { return fnv1a64(config.dump()); }

const NamedTensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.scalar(Checkpoint::kFormatVersion);
  w.scalar(checkpoint.config_digest());
  w.string(checkpoint.config.dump());
  w.scalar(checkpoint.step);
  w.string(checkpoint.rng_state);
  w.scalar(checkpoint.baseline);
  w.scalar(static_cast<std::uint8_t>(checkpoint.baseline_ready ? 1 : 0));
  w.scalar(static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& t : checkpoint.tensors) {
    std::uint64_t count = 1;
    for (auto d : t.shape) count *= d;
    if (count != t.values.size()) throw Error(ErrorKind::shape, "tensor " + t.name + " payload does not match shape");
    w.string(t.name);
    w.scalar(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.scalar(d);
    for (double v : t.values) w.scalar(v);
  }
  std::string body = w.take();
  Writer tail;
  tail.scalar(fnv1a64(body));
  return body + tail.take();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + sizeof(std::uint64_t)) throw Error(ErrorKind::integrity, "checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::integrity, "not a checkpoint (bad magic)");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  Reader trailer(bytes.substr(body.size()));
  if (trailer.scalar<std::uint64_t>() != fnv1a64(body)) {
    throw Error(ErrorKind::integrity, "checkpoint checksum mismatch (file corrupt or truncated)");
  }

  Reader r(body);
  char magic[4];
  r.bytes(magic, sizeof(magic));
  const auto version = r.scalar<std::uint32_t>();
  if (version != Checkpoint::kFormatVersion) {
    throw Error(ErrorKind::integrity, "unsupported checkpoint format version " + std::to_string(version));
  }
  Checkpoint cp;
  const auto digest = r.scalar<std::uint64_t>();
  try {
    cp.config = nlohmann::json::parse(r.string());
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorKind::integrity, "checkpoint config is not valid JSON");
  }
  if (cp.config_digest() != digest) throw Error(ErrorKind::integrity, "checkpoint config digest mismatch");
  cp.step = r.scalar<std::uint64_t>();
  cp.rng_state = r.string();
  cp.baseline = r.scalar<double>();
  cp.baseline_ready = r.scalar<std::uint8_t>() != 0;
  const auto count = r.scalar<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedTensor t;
    t.name = r.string();
    const auto rank = r.scalar<std::uint32_t>();
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.shape.push_back(r.scalar<std::uint64_t>());
      total *= t.shape.back();
    }
    if (total > r.remaining() / sizeof(double)) throw Error(ErrorKind::integrity, "tensor " + t.name + " is truncated");
    t.values.resize(total);
    for (auto& v : t.values) v = r.scalar<double>();
    cp.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw Error(ErrorKind::integrity, "trailing bytes after the last tensor");
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write checkpoint '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace grlp
