#include "perspectra/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "perspectra/error.hpp"
#include "text_util.hpp"

namespace perspectra {
namespace {

constexpr char kMagic[4] = {'P', 'G', 'N', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw DataError("truncated checkpoint");
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Checkpoint::set(std::string key, std::string value) {
  for (auto& [k, v] : config) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  config.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> Checkpoint::get(std::string_view key) const {
  for (const auto& [k, v] : config) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& Checkpoint::require(std::string_view key) const {
  for (const auto& [k, v] : config) {
    if (k == key) return v;
  }
  throw DataError("checkpoint is missing config key " + std::string(key));
}

void Checkpoint::put(std::string name, Matrix<float> m) {
  for (auto& [n, t] : tensors) {
    if (n == name) {
      t = std::move(m);
      return;
    }
  }
  tensors.emplace_back(std::move(name), std::move(m));
}

const Matrix<float>* Checkpoint::find(std::string_view name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

const Matrix<float>& Checkpoint::tensor(std::string_view name) const {
  if (const auto* t = find(name)) return *t;
  throw DataError("checkpoint is missing tensor " + std::string(name));
}

std::string Checkpoint::encode() const {
  std::string out(kMagic, 4);
  put_u32(out, kVersion);
  std::string block;
  for (const auto& [k, v] : config) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw Error("checkpoint config entry cannot contain '=' in the key or newlines: " + k);
    }
    block += k + "=" + v + "\n";
  }
  put_u32(out, static_cast<std::uint32_t>(block.size()));
  out += block;
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, m] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (const float v : m.flat()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint Checkpoint::decode(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("bad magic");
  in.take(4);
  if (const auto version = in.u32(); version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const auto block = in.take(in.u32());
  std::size_t start = 0;
  while (start < block.size()) {
    auto end = block.find('\n', start);
    if (end == std::string_view::npos) end = block.size();
    const auto line = block.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError("malformed checkpoint config line");
    ckpt.config.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  const auto count = in.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(in.take(in.u32()));
    const auto rows = in.u32();
    const auto cols = in.u32();
    const auto raw = in.take(static_cast<std::size_t>(rows) * cols * 4);
    Matrix<float> m(rows, cols);
    for (std::size_t k = 0; k < m.size(); ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * k + b])) << (8 * b);
      m.data()[k] = std::bit_cast<float>(bits);
    }
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  if (!in.done()) throw DataError("trailing bytes after checkpoint tensors");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  detail::write_file(path, ckpt.encode());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return Checkpoint::decode(detail::read_file(path)); }

}  // namespace perspectra
