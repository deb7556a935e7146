#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perspectra/corpus.hpp"
#include "perspectra/rng.hpp"
#include "perspectra/types.hpp"

namespace perspectra::testing {

struct MentionSpec {
  std::string surface;
  std::optional<Perspective> gold;
};

/// A tweet whose text is "on <surface> and <surface> ..." with spans filled in.
inline Tweet make_tweet(std::string id, std::string author, const std::vector<MentionSpec>& mentions,
                        std::vector<std::string> hashtags = {}, std::optional<Stance> gold = std::nullopt,
                        std::string date = "2020-05-26") {
  Tweet t;
  t.id = std::move(id);
  t.author_id = std::move(author);
  t.timestamp = std::move(date);
  t.hashtags = std::move(hashtags);
  t.gold_stance = gold;
  t.text = "on";
  for (std::size_t k = 0; k < mentions.size(); ++k) {
    t.text += k == 0 ? " " : " and ";
    EntityMention m;
    m.id = t.id + "_m" + std::to_string(k);
    m.surface = mentions[k].surface;
    m.start = t.text.size();
    t.text += m.surface;
    m.end = t.text.size();
    m.gold = mentions[k].gold;
    t.entities.push_back(std::move(m));
  }
  for (const auto& h : t.hashtags) t.text += " #" + h;
  return t;
}

inline Author make_author(std::string id, std::optional<Stance> gold = std::nullopt,
                          std::optional<std::string> profile = std::nullopt) {
  Author a;
  a.id = std::move(id);
  a.gold_stance = gold;
  a.profile = std::move(profile);
  return a;
}

inline Perspective random_perspective(Rng& rng) {
  return {entity_from_code(static_cast<int>(rng.below(kNumEntities))), static_cast<Sentiment>(rng.below(2)),
          static_cast<Role>(rng.below(2))};
}

struct RandomShape {
  std::size_t authors = 3;
  std::size_t tweets = 6;
  std::size_t mentions = 6;  // distributed over the tweets
  std::size_t hashtags = 3;  // distinct tags, each used at least once when tweets > 0
  std::size_t keywords = 2;  // distinct keywords, each on at least one author
  double retweet_rate = 0.3;
};

/// Random gold-labeled corpus with exactly the requested entity counts, so the
/// graph has authors + tweets + mentions + hashtags + keywords nodes.
inline Corpus random_corpus(Rng& rng, const RandomShape& s) {
  std::vector<Author> authors;
  for (std::size_t a = 0; a < s.authors; ++a) {
    auto author = make_author("a" + std::to_string(a), static_cast<Stance>(rng.below(2)));
    if (rng.bernoulli(0.5)) author.profile = "profile text " + std::to_string(rng.below(5));
    authors.push_back(std::move(author));
  }
  for (std::size_t k = 0; k < s.keywords; ++k) {
    authors[k < s.authors ? k : rng.below(s.authors)].keywords.push_back("kw" + std::to_string(k));
    if (rng.bernoulli(0.3)) authors[rng.below(s.authors)].keywords.push_back("kw" + std::to_string(k));
  }
  for (auto& a : authors) {
    std::sort(a.keywords.begin(), a.keywords.end());
    a.keywords.erase(std::unique(a.keywords.begin(), a.keywords.end()), a.keywords.end());
    for (std::size_t b = 0; b < s.authors; ++b) {
      if (rng.bernoulli(s.retweet_rate)) a.retweets.push_back("a" + std::to_string(b));
    }
  }

  std::vector<std::size_t> mention_count(s.tweets, 0);
  for (std::size_t m = 0; m < s.mentions && s.tweets > 0; ++m) ++mention_count[rng.below(s.tweets)];
  std::vector<std::vector<std::string>> tags(s.tweets);
  for (std::size_t h = 0; h < s.hashtags && s.tweets > 0; ++h) {
    tags[h < s.tweets ? h : rng.below(s.tweets)].push_back("tag" + std::to_string(h));
    if (rng.bernoulli(0.4)) {
      auto& other = tags[rng.below(s.tweets)];
      if (std::find(other.begin(), other.end(), "tag" + std::to_string(h)) == other.end()) {
        other.push_back("tag" + std::to_string(h));
      }
    }
  }
  static const char* const kSurfaces[] = {"police", "protesters", "thugs", "the mayor", "lives"};
  std::vector<Tweet> tweets;
  for (std::size_t t = 0; t < s.tweets; ++t) {
    std::vector<MentionSpec> mentions;
    for (std::size_t k = 0; k < mention_count[t]; ++k) {
      mentions.push_back({kSurfaces[rng.below(5)], random_perspective(rng)});
    }
    const std::size_t author = t < s.authors ? t : rng.below(s.authors);
    tweets.push_back(make_tweet("t" + std::to_string(t), "a" + std::to_string(author), mentions, tags[t],
                                static_cast<Stance>(rng.below(2))));
  }
  return Corpus::from_records(std::move(authors), std::move(tweets));
}

/// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("perspectra_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace perspectra::testing
