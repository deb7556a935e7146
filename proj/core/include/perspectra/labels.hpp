#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perspectra/corpus.hpp"
#include "perspectra/model.hpp"
#include "perspectra/types.hpp"

namespace perspectra {

enum class LabelOrigin : std::uint8_t { Seed, Pseudo };

struct TweetLabel {
  Stance stance{};
  LabelOrigin origin{};
  friend bool operator==(const TweetLabel&, const TweetLabel&) = default;
};

struct MentionLabel {
  Perspective triple;
  LabelOrigin origin{};
  friend bool operator==(const MentionLabel&, const MentionLabel&) = default;
};

/// Training labels: seeds plus pseudo-labels accumulated by self-learning.
/// Entries are write-once, so the set only grows.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::size_t tweets, std::size_t mentions) : tweets_(tweets), mentions_(mentions) {}

  /// Seeds from the gold labels of `authors`: their stance, every tweet and every
  /// labeled mention. Throws DataError if a seed tweet has no gold stance.
  static LabelSet from_gold_authors(const Corpus& corpus, std::span<const std::size_t> authors);

  const std::optional<TweetLabel>& tweet(std::size_t t) const { return tweets_.at(t); }
  const std::optional<MentionLabel>& mention(std::size_t m) const { return mentions_.at(m); }

  /// Returns false (and changes nothing) if the item already has a label.
  bool add_tweet(std::size_t t, Stance s, LabelOrigin origin);
  bool add_mention(std::size_t m, const Perspective& p, LabelOrigin origin);

  std::size_t size_tweets() const { return tweet_count_; }
  std::size_t size_mentions() const { return mention_count_; }
  std::size_t num_tweets() const { return tweets_.size(); }
  std::size_t num_mentions() const { return mentions_.size(); }
  std::size_t count_tweets(LabelOrigin origin) const;

  const std::map<std::size_t, Stance>& seed_authors() const { return seed_authors_; }
  void add_seed_author(std::size_t a, Stance s) { seed_authors_.emplace(a, s); }

  /// Model targets; entity-stance rows take the label of the containing tweet.
  Targets targets(std::span<const std::uint32_t> mention_tweet) const;

  /// One JSON object per labeled item: {"kind","id","label","origin"}.
  std::string to_jsonl(const Corpus& corpus) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::optional<TweetLabel>> tweets_;
  std::vector<std::optional<MentionLabel>> mentions_;
  std::map<std::size_t, Stance> seed_authors_;
  std::size_t tweet_count_ = 0;
  std::size_t mention_count_ = 0;
};

std::string_view to_string(LabelOrigin o);

}  // namespace perspectra
