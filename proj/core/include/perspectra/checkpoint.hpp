#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "perspectra/numkit/matrix.hpp"

namespace perspectra {

/// Binary, little-endian container: magic "PGN1", u32 version, a `key=value`
/// config block, then length-prefixed named f32 tensors.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, Matrix<float>>> tensors;

  void set(std::string key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  /// Throws DataError if the key is absent.
  const std::string& require(std::string_view key) const;

  void put(std::string name, Matrix<float> m);
  const Matrix<float>* find(std::string_view name) const;
  /// Throws DataError if the tensor is absent.
  const Matrix<float>& tensor(std::string_view name) const;

  std::string encode() const;
  /// Throws DataError("bad magic"), on version mismatch and on truncation.
  static Checkpoint decode(std::string_view bytes);

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace perspectra
