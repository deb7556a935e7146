#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <string>

#include "perspectra/types.hpp"

namespace perspectra {

/// Stance -> set of compatible perspectives. The default instance holds the
/// eight pro-BlackLM and eight pro-BlueLM perspectives of the #BLM study.
class PerspectiveTable {
 public:
  PerspectiveTable() = default;

  static PerspectiveTable defaults();

  /// Parses lines of the form `pro_blacklm: police negative actor`.
  /// Blank lines and lines starting with '#' are ignored.
  static PerspectiveTable parse(const std::string& text);
  static PerspectiveTable load(const std::filesystem::path& path);

  void add(Stance s, Perspective p) { entries_[code(s)].insert(p); }

  const std::set<Perspective>& lookup(Stance s) const { return entries_[code(s)]; }
  bool contains(Stance s, const Perspective& p) const { return lookup(s).contains(p); }

  /// Canonical text form, parseable by parse().
  std::string serialize() const;

  std::size_t size() const { return entries_[0].size() + entries_[1].size(); }

  friend bool operator==(const PerspectiveTable&, const PerspectiveTable&) = default;

 private:
  std::array<std::set<Perspective>, kNumStances> entries_;
};

}  // namespace perspectra
