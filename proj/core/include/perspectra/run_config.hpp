#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perspectra/experiment.hpp"

namespace perspectra {

/// Everything a command needs: the experiment knobs plus file locations.
///
/// The file form is `key = value` lines grouped under `[section]` headers; `#`
/// starts a comment. Keys are addressed as `section.key` (e.g. `train.k`,
/// `gen.ambiguous_rate`, `paths.corpus`). Unknown sections or keys are rejected.
struct RunConfig {
  ExperimentConfig experiment;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> weak_corpus;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> perspective_table;
  std::optional<std::filesystem::path> checkpoint;
  std::filesystem::path out = "run";
  std::vector<std::uint64_t> seeds;  // sweep list for scripted runs; empty means experiment.seed

  /// Sets one `section.key`. Throws UsageError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);

  /// Applies every assignment in a config text on top of the current values.
  void apply_text(std::string_view text);
  void apply_file(const std::filesystem::path& path);

  /// All known keys, in documentation order.
  static const std::vector<std::string>& keys();

  /// Canonical `key = value` text (sections included) reproducing this config.
  std::string to_text() const;
};

}  // namespace perspectra
