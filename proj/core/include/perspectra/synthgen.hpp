#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perspectra/corpus.hpp"
#include "perspectra/lexicon.hpp"
#include "perspectra/perspective_table.hpp"

namespace perspectra {

enum class GenMode { RealLike, WeakSupervision };

struct GenConfig {
  std::size_t n_authors = 150;  // ignored in WeakSupervision mode
  std::size_t tweets_min = 5;
  std::size_t tweets_max = 15;
  double stance_mix = 0.5;  // fraction of pro-BlackLM authors
  double ambiguous_rate = 0.15;
  double retweet_homophily = 0.9;
  double entity_rate = 1.5;  // expected mentions per tweet, in [1, 3]
  std::uint64_t seed = 1000;
  GenMode mode = GenMode::RealLike;

  std::size_t weak_tweets_per_tuple = 20;
  double signature_rate = 0.4;  // own signature hashtag on non-hijacked tweets
  double cue_rate = 0.7;        // mention surface carries a sentiment/role modifier
  double frame_rate = 0.5;      // tweet carries a stance framing phrase
  double ambiguous_surface_rate = 0.2;
  double profile_rate = 0.5;
  /// When set, authors get politician follows and tweets get media shares whose
  /// party/bias matches the author's stance with probability (1 + alignment) / 2.
  std::optional<double> behavior_alignment;
  /// Linear tilt of pro-BlueLM tweet dates toward the end of the window, in [0, 1].
  double time_ramp = 0.0;
  std::string start_date = "2020-05-26";
  int days = 31;
  /// Prepended to every generated id; WeakSupervision defaults to "w" when empty.
  std::string id_prefix;

  /// Throws UsageError on out-of-range values.
  void validate() const;
};

/// Deterministic, fully gold-labeled corpus. Pure function of (cfg, lexicon, table).
Corpus generate(const GenConfig& cfg, const Lexicon& lexicon,
                const PerspectiveTable& table = PerspectiveTable::defaults());

/// Planted labels in tabular form.
struct OracleLabels {
  struct MentionRow {
    std::string mention_id;
    std::string tweet_id;
    Perspective triple;
  };
  std::vector<std::pair<std::string, Stance>> author_stances;
  std::vector<std::pair<std::string, Stance>> tweet_stances;
  std::vector<MentionRow> mentions;
  std::vector<std::pair<std::string, bool>> ambiguous;

  /// "kind,id,label" rows.
  std::string to_csv() const;
};

/// Throws DataError if any tweet or mention lacks its gold label.
OracleLabels oracle_labels(const Corpus& corpus);

}  // namespace perspectra
