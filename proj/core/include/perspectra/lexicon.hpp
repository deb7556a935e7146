#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "perspectra/perspective_table.hpp"
#include "perspectra/types.hpp"

namespace perspectra {

/// Index of a (sentiment, role) pair: positive actor 0, positive target 1,
/// negative actor 2, negative target 3.
constexpr int frame_index(Sentiment s, Role r) { return code(s) * 2 + code(r); }

/// A surface that names different abstract entities depending on who says it
/// ("thugs" is the police for one camp and antifa for the other).
struct AmbiguousSurface {
  std::string surface;
  std::array<AbstractEntity, kNumStances> per_stance{};
  friend bool operator==(const AmbiguousSurface&, const AmbiguousSurface&) = default;
};

/// Word lists driving the template generator. See docs/formats.md for the file grammar.
struct Lexicon {
  std::array<std::vector<std::string>, kNumEntities> entity_surfaces;
  std::vector<AmbiguousSurface> ambiguous;
  std::array<std::vector<std::string>, kNumStances> stance_hashtags;
  std::vector<std::string> neutral_hashtags;
  std::array<std::vector<std::string>, 4> templates;  // by frame_index, each with one "{E}"
  std::array<std::vector<std::string>, 4> modifiers;  // by frame_index
  std::array<std::vector<std::string>, kNumStances> frames;
  std::array<std::vector<std::string>, kNumStances> profile_keywords;
  std::vector<std::string> neutral_keywords;

  /// The lexicon shipped as data/lexicon.txt (embedded at build time).
  static Lexicon defaults();
  static Lexicon parse(const std::string& text);
  static Lexicon load(const std::filesystem::path& path);

  /// Throws DataError if the lexicon cannot realize every perspective in `table`.
  void validate(const PerspectiveTable& table) const;

  friend bool operator==(const Lexicon&, const Lexicon&) = default;
};

/// The signature keyword of a stance ("blacklivesmatter" / "bluelivesmatter").
std::string_view signature_keyword(Stance s);

}  // namespace perspectra
