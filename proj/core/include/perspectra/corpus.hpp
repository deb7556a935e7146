#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "perspectra/types.hpp"

namespace perspectra {

enum class Party : std::uint8_t { Democrat, Republican };
enum class MediaBias : std::uint8_t { Left, Right };

struct Follow {
  std::string politician_id;
  Party party{};
  friend bool operator==(const Follow&, const Follow&) = default;
};

struct MediaShare {
  std::string domain;
  MediaBias bias{};
  friend bool operator==(const MediaShare&, const MediaShare&) = default;
};

struct EntityMention {
  std::string id;
  std::string surface;
  std::size_t start = 0;  // byte offsets into Tweet::text, half-open
  std::size_t end = 0;
  std::optional<Perspective> gold;
  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

struct Author {
  std::string id;
  std::optional<std::string> profile;
  std::vector<std::string> keywords;
  std::vector<std::string> retweets;
  std::optional<std::vector<Follow>> follows;
  std::optional<Stance> gold_stance;
  // Weak-supervision authors stand for a (stance, perspective) tuple rather than a person.
  bool imaginary = false;
  friend bool operator==(const Author&, const Author&) = default;
};

struct Tweet {
  std::string id;
  std::string author_id;
  std::string text;
  std::string timestamp;  // YYYY-MM-DD
  std::vector<std::string> hashtags;
  std::vector<EntityMention> entities;
  std::optional<std::vector<MediaShare>> domains;
  std::optional<Stance> gold_stance;
  std::optional<bool> gold_ambiguous;
  friend bool operator==(const Tweet&, const Tweet&) = default;
};

/// Validated, immutable collection of authors and tweets with dense ordinals.
/// Mentions are numbered globally in tweet order: tweet t owns the ordinals
/// [first_mention(t), first_mention(t) + tweets()[t].entities.size()).
class Corpus {
 public:
  Corpus() = default;

  /// Validates referential integrity, span bounds and overlap, dates and id
  /// uniqueness; normalizes hashtags. Throws DataError.
  static Corpus from_records(std::vector<Author> authors, std::vector<Tweet> tweets);

  const std::vector<Author>& authors() const { return authors_; }
  const std::vector<Tweet>& tweets() const { return tweets_; }
  std::size_t num_mentions() const { return mention_tweet_.size(); }

  const EntityMention& mention(std::size_t m) const;
  std::size_t mention_tweet(std::size_t m) const { return mention_tweet_.at(m); }
  std::size_t first_mention(std::size_t t) const { return first_mention_.at(t); }
  std::size_t tweet_author(std::size_t t) const { return tweet_author_.at(t); }
  const std::vector<std::size_t>& author_tweets(std::size_t a) const { return author_tweets_.at(a); }
  const std::vector<std::size_t>& author_retweets(std::size_t a) const { return author_retweets_.at(a); }

  std::optional<std::size_t> author_index(std::string_view id) const;
  std::optional<std::size_t> tweet_index(std::string_view id) const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.authors_ == b.authors_ && a.tweets_ == b.tweets_;
  }

 private:
  std::vector<Author> authors_;
  std::vector<Tweet> tweets_;
  std::unordered_map<std::string, std::size_t> author_index_;
  std::unordered_map<std::string, std::size_t> tweet_index_;
  std::vector<std::size_t> tweet_author_;
  std::vector<std::size_t> first_mention_;
  std::vector<std::size_t> mention_tweet_;
  std::vector<std::vector<std::size_t>> author_tweets_;
  std::vector<std::vector<std::size_t>> author_retweets_;
};

/// Strips a leading '#', lowercases and applies Unicode NFC.
std::string normalize_hashtag(std::string_view tag);

Corpus parse_corpus(std::string_view jsonl);
Corpus load_corpus(const std::filesystem::path& path);
/// Canonical JSONL: authors first, then tweets, fixed key order, optional keys omitted.
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Same corpus without any gold fields.
Corpus strip_labels(const Corpus& corpus);

/// Concatenation of two corpora; throws DataError on id collisions.
Corpus merge_corpora(const Corpus& a, const Corpus& b);

struct AuthorSplit {
  std::vector<std::size_t> train_authors;  // sorted ordinals
  std::vector<std::size_t> test_authors;
  std::vector<std::size_t> train_tweets;
  std::vector<std::size_t> test_tweets;
};

/// Samples n_train labeled (non-imaginary) authors, stratified by gold stance in
/// proportion to the labeled population; every other labeled author is test.
AuthorSplit split_by_author(const Corpus& corpus, std::size_t n_train_authors, std::uint64_t seed);

/// Tweets whose gold stance is contradicted by the opponent's signature keyword
/// ("bluelivesmatter" in a pro-BlackLM tweet, "blacklivesmatter" in a pro-BlueLM one).
std::set<std::size_t> flag_ambiguous(const Corpus& corpus);

inline constexpr std::string_view kBlackKeyword = "blacklivesmatter";
inline constexpr std::string_view kBlueKeyword = "bluelivesmatter";

/// True if the tweet's text or hashtags contain `lower_keyword` (case-insensitive substring).
bool tweet_has_keyword(const Tweet& tweet, std::string_view lower_keyword);

}  // namespace perspectra
