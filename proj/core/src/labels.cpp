#include "perspectra/labels.hpp"

#include <nlohmann/json.hpp>

#include "perspectra/error.hpp"

namespace perspectra {

std::string_view to_string(LabelOrigin o) { return o == LabelOrigin::Seed ? "seed" : "pseudo"; }

LabelSet LabelSet::from_gold_authors(const Corpus& corpus, std::span<const std::size_t> authors) {
  LabelSet labels(corpus.tweets().size(), corpus.num_mentions());
  for (const auto a : authors) {
    const auto& author = corpus.authors().at(a);
    if (author.gold_stance) labels.seed_authors_[a] = *author.gold_stance;
    for (const auto t : corpus.author_tweets(a)) {
      const auto& tweet = corpus.tweets()[t];
      if (!tweet.gold_stance) throw DataError("seed tweet " + tweet.id + " has no gold stance");
      labels.add_tweet(t, *tweet.gold_stance, LabelOrigin::Seed);
      for (std::size_t k = 0; k < tweet.entities.size(); ++k) {
        if (tweet.entities[k].gold) labels.add_mention(corpus.first_mention(t) + k, *tweet.entities[k].gold, LabelOrigin::Seed);
      }
    }
  }
  return labels;
}

bool LabelSet::add_tweet(std::size_t t, Stance s, LabelOrigin origin) {
  auto& slot = tweets_.at(t);
  if (slot) return false;
  slot = TweetLabel{s, origin};
  ++tweet_count_;
  return true;
}

bool LabelSet::add_mention(std::size_t m, const Perspective& p, LabelOrigin origin) {
  auto& slot = mentions_.at(m);
  if (slot) return false;
  slot = MentionLabel{p, origin};
  ++mention_count_;
  return true;
}

std::size_t LabelSet::count_tweets(LabelOrigin origin) const {
  std::size_t n = 0;
  for (const auto& t : tweets_) n += t && t->origin == origin ? 1 : 0;
  return n;
}

Targets LabelSet::targets(std::span<const std::uint32_t> mention_tweet) const {
  if (mention_tweet.size() != mentions_.size()) throw DataError("label set does not match the graph's mentions");
  Targets tg = Targets::empty(tweets_.size(), mentions_.size());
  for (std::size_t t = 0; t < tweets_.size(); ++t) {
    if (!tweets_[t]) continue;
    tg.tweet_stance[t] = code(tweets_[t]->stance);
    tg.tweet_mask[t] = 1;
  }
  for (std::size_t m = 0; m < mentions_.size(); ++m) {
    if (const auto& label = mentions_[m]) {
      tg.sentiment[m] = code(label->triple.sentiment);
      tg.role[m] = code(label->triple.role);
      tg.mapping[m] = code(label->triple.entity);
      tg.mention_mask[m] = 1;
    }
    if (const auto& tw = tweets_.at(mention_tweet[m])) {
      tg.entity_stance[m] = code(tw->stance);
      tg.entity_stance_mask[m] = 1;
    }
  }
  return tg;
}

std::string LabelSet::to_jsonl(const Corpus& corpus) const {
  std::string out;
  for (const auto& [a, s] : seed_authors_) {
    nlohmann::ordered_json o{{"kind", "author"}, {"id", corpus.authors()[a].id}, {"label", to_string(s)}, {"origin", "seed"}};
    out += o.dump() + "\n";
  }
  for (std::size_t t = 0; t < tweets_.size(); ++t) {
    if (!tweets_[t]) continue;
    nlohmann::ordered_json o{{"kind", "tweet"},
                             {"id", corpus.tweets()[t].id},
                             {"label", to_string(tweets_[t]->stance)},
                             {"origin", to_string(tweets_[t]->origin)}};
    out += o.dump() + "\n";
  }
  for (std::size_t m = 0; m < mentions_.size(); ++m) {
    if (!mentions_[m]) continue;
    nlohmann::ordered_json o{{"kind", "mention"},
                             {"id", corpus.mention(m).id},
                             {"label", to_string(mentions_[m]->triple)},
                             {"origin", to_string(mentions_[m]->origin)}};
    out += o.dump() + "\n";
  }
  return out;
}

}  // namespace perspectra
