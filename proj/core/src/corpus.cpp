#include "perspectra/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <nlohmann/json.hpp>
#include <sstream>

#include "perspectra/error.hpp"
#include "perspectra/rng.hpp"
#include "text_util.hpp"

namespace perspectra {
namespace {

using ojson = nlohmann::ordered_json;

bool valid_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int y = std::stoi(std::string(s.substr(0, 4)));
  const unsigned m = static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2))));
  const unsigned d = static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2))));
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

[[noreturn]] void fail_line(int line, const std::string& msg) {
  throw DataError("line " + std::to_string(line) + ": " + msg);
}

void check_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed, int line) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      fail_line(line, "unknown key '" + it.key() + "'");
    }
  }
}

std::string req_string(const nlohmann::json& obj, const char* key, int line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) fail_line(line, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::vector<std::string> req_string_list(const nlohmann::json& obj, const char* key, int line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) fail_line(line, std::string("missing array field '") + key + "'");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) fail_line(line, std::string("non-string element in '") + key + "'");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::optional<Stance> opt_stance(const nlohmann::json& obj, int line) {
  const auto it = obj.find("gold_stance");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail_line(line, "gold_stance must be a string");
  const auto s = parse_stance(it->get<std::string>());
  if (!s) fail_line(line, "unknown stance '" + it->get<std::string>() + "'");
  return s;
}

Author parse_author(const nlohmann::json& obj, int line) {
  check_keys(obj, {"type", "id", "profile", "keywords", "retweets", "follows", "gold_stance", "imaginary"}, line);
  Author a;
  a.id = req_string(obj, "id", line);
  if (const auto it = obj.find("profile"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) fail_line(line, "profile must be a string or null");
    a.profile = it->get<std::string>();
  }
  a.keywords = req_string_list(obj, "keywords", line);
  a.retweets = req_string_list(obj, "retweets", line);
  if (const auto it = obj.find("follows"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) fail_line(line, "follows must be an array");
    std::vector<Follow> follows;
    for (const auto& f : *it) {
      if (!f.is_object()) fail_line(line, "follows entries must be objects");
      check_keys(f, {"id", "party"}, line);
      Follow fo;
      fo.politician_id = req_string(f, "id", line);
      const auto party = req_string(f, "party", line);
      if (party == "D") {
        fo.party = Party::Democrat;
      } else if (party == "R") {
        fo.party = Party::Republican;
      } else {
        fail_line(line, "unknown party '" + party + "'");
      }
      follows.push_back(std::move(fo));
    }
    a.follows = std::move(follows);
  }
  a.gold_stance = opt_stance(obj, line);
  if (const auto it = obj.find("imaginary"); it != obj.end()) {
    if (!it->is_boolean()) fail_line(line, "imaginary must be a boolean");
    a.imaginary = it->get<bool>();
  }
  return a;
}

Tweet parse_tweet(const nlohmann::json& obj, int line) {
  check_keys(obj,
             {"type", "id", "author_id", "text", "timestamp", "hashtags", "entities", "domains", "gold_stance",
              "gold_ambiguous"},
             line);
  Tweet t;
  t.id = req_string(obj, "id", line);
  t.author_id = req_string(obj, "author_id", line);
  t.text = req_string(obj, "text", line);
  t.timestamp = req_string(obj, "timestamp", line);
  t.hashtags = req_string_list(obj, "hashtags", line);

  const auto ents = obj.find("entities");
  if (ents == obj.end() || !ents->is_array()) fail_line(line, "missing array field 'entities'");
  for (const auto& e : *ents) {
    if (!e.is_object()) fail_line(line, "entities must be objects");
    check_keys(e, {"id", "surface", "start", "end", "gold"}, line);
    EntityMention m;
    m.id = req_string(e, "id", line);
    m.surface = req_string(e, "surface", line);
    const auto s = e.find("start");
    const auto en = e.find("end");
    if (s == e.end() || en == e.end() || !s->is_number_unsigned() || !en->is_number_unsigned()) {
      fail_line(line, "entity '" + m.id + "' needs non-negative integer start/end");
    }
    m.start = s->get<std::size_t>();
    m.end = en->get<std::size_t>();
    if (const auto g = e.find("gold"); g != e.end() && !g->is_null()) {
      if (!g->is_object()) fail_line(line, "gold must be an object");
      check_keys(*g, {"entity", "sentiment", "role"}, line);
      const auto ent_tok = req_string(*g, "entity", line);
      const auto sent_tok = req_string(*g, "sentiment", line);
      const auto role_tok = req_string(*g, "role", line);
      const auto ent = parse_entity(ent_tok);
      if (!ent) fail_line(line, "unknown entity '" + ent_tok + "'");
      const auto sent = parse_sentiment(sent_tok);
      if (!sent) fail_line(line, "unknown sentiment '" + sent_tok + "'");
      const auto role = parse_role(role_tok);
      // An entity labeled both actor and target has no single role and is rejected.
      if (!role) fail_line(line, "unknown or ambiguous role '" + role_tok + "' for entity '" + m.id + "'");
      m.gold = Perspective{*ent, *sent, *role};
    }
    t.entities.push_back(std::move(m));
  }

  if (const auto d = obj.find("domains"); d != obj.end() && !d->is_null()) {
    if (!d->is_array()) fail_line(line, "domains must be an array");
    std::vector<MediaShare> shares;
    for (const auto& x : *d) {
      if (!x.is_object()) fail_line(line, "domains entries must be objects");
      check_keys(x, {"domain", "bias"}, line);
      MediaShare ms;
      ms.domain = req_string(x, "domain", line);
      const auto bias = req_string(x, "bias", line);
      if (bias == "left") {
        ms.bias = MediaBias::Left;
      } else if (bias == "right") {
        ms.bias = MediaBias::Right;
      } else {
        fail_line(line, "unknown media bias '" + bias + "'");
      }
      shares.push_back(std::move(ms));
    }
    t.domains = std::move(shares);
  }
  t.gold_stance = opt_stance(obj, line);
  if (const auto it = obj.find("gold_ambiguous"); it != obj.end() && !it->is_null()) {
    if (!it->is_boolean()) fail_line(line, "gold_ambiguous must be a boolean");
    t.gold_ambiguous = it->get<bool>();
  }
  return t;
}

ojson author_to_json(const Author& a) {
  ojson o;
  o["type"] = "author";
  o["id"] = a.id;
  o["profile"] = a.profile ? ojson(*a.profile) : ojson(nullptr);
  o["keywords"] = a.keywords;
  o["retweets"] = a.retweets;
  if (a.follows) {
    ojson arr = ojson::array();
    for (const auto& f : *a.follows) {
      arr.push_back(ojson{{"id", f.politician_id}, {"party", f.party == Party::Democrat ? "D" : "R"}});
    }
    o["follows"] = std::move(arr);
  }
  if (a.gold_stance) o["gold_stance"] = to_string(*a.gold_stance);
  if (a.imaginary) o["imaginary"] = true;
  return o;
}

ojson tweet_to_json(const Tweet& t) {
  ojson o;
  o["type"] = "tweet";
  o["id"] = t.id;
  o["author_id"] = t.author_id;
  o["text"] = t.text;
  o["timestamp"] = t.timestamp;
  o["hashtags"] = t.hashtags;
  ojson ents = ojson::array();
  for (const auto& m : t.entities) {
    ojson e;
    e["id"] = m.id;
    e["surface"] = m.surface;
    e["start"] = m.start;
    e["end"] = m.end;
    if (m.gold) {
      e["gold"] = ojson{{"entity", to_string(m.gold->entity)},
                        {"sentiment", to_string(m.gold->sentiment)},
                        {"role", to_string(m.gold->role)}};
    }
    ents.push_back(std::move(e));
  }
  o["entities"] = std::move(ents);
  if (t.domains) {
    ojson arr = ojson::array();
    for (const auto& d : *t.domains) {
      arr.push_back(ojson{{"domain", d.domain}, {"bias", d.bias == MediaBias::Left ? "left" : "right"}});
    }
    o["domains"] = std::move(arr);
  }
  if (t.gold_stance) o["gold_stance"] = to_string(*t.gold_stance);
  if (t.gold_ambiguous) o["gold_ambiguous"] = *t.gold_ambiguous;
  return o;
}

}  // namespace

std::string normalize_hashtag(std::string_view tag) {
  if (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
  std::string lower = detail::to_lower_ascii(tag);
  const bool ascii = std::all_of(lower.begin(), lower.end(), [](char c) { return (c & 0x80) == 0; });
  if (ascii) return lower;

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(lower);
  u.toLower();
  icu::UnicodeString normalized = nfc->normalize(u, status);
  if (U_FAILURE(status)) throw DataError("cannot normalize hashtag '" + std::string(tag) + "'");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

Corpus Corpus::from_records(std::vector<Author> authors, std::vector<Tweet> tweets) {
  Corpus c;
  c.authors_ = std::move(authors);
  c.tweets_ = std::move(tweets);

  for (std::size_t i = 0; i < c.authors_.size(); ++i) {
    if (!c.author_index_.emplace(c.authors_[i].id, i).second) {
      throw DataError("duplicate author id " + c.authors_[i].id);
    }
  }
  c.author_retweets_.resize(c.authors_.size());
  for (std::size_t i = 0; i < c.authors_.size(); ++i) {
    for (const auto& r : c.authors_[i].retweets) {
      const auto it = c.author_index_.find(r);
      if (it == c.author_index_.end()) {
        throw DataError("unknown author " + r + " in retweets of " + c.authors_[i].id);
      }
      c.author_retweets_[i].push_back(it->second);
    }
  }

  std::unordered_map<std::string, std::size_t> mention_ids;
  c.author_tweets_.resize(c.authors_.size());
  for (std::size_t t = 0; t < c.tweets_.size(); ++t) {
    auto& tw = c.tweets_[t];
    if (!c.tweet_index_.emplace(tw.id, t).second) throw DataError("duplicate tweet id " + tw.id);
    const auto a = c.author_index_.find(tw.author_id);
    if (a == c.author_index_.end()) throw DataError("unknown author " + tw.author_id);
    if (!valid_date(tw.timestamp)) throw DataError("tweet " + tw.id + ": bad timestamp '" + tw.timestamp + "'");
    c.tweet_author_.push_back(a->second);
    c.author_tweets_[a->second].push_back(t);

    for (auto& h : tw.hashtags) h = normalize_hashtag(h);

    std::vector<std::pair<std::size_t, std::size_t>> spans;
    c.first_mention_.push_back(c.mention_tweet_.size());
    for (const auto& m : tw.entities) {
      if (!mention_ids.emplace(m.id, c.mention_tweet_.size()).second) {
        throw DataError("duplicate entity id " + m.id);
      }
      if (m.start > m.end || m.end > tw.text.size()) {
        throw DataError("entity " + m.id + " span out of bounds in tweet " + tw.id);
      }
      if (tw.text.compare(m.start, m.end - m.start, m.surface) != 0) {
        throw DataError("entity " + m.id + " surface does not match text in tweet " + tw.id);
      }
      spans.emplace_back(m.start, m.end);
      c.mention_tweet_.push_back(t);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first < spans[i - 1].second) throw DataError("overlapping entity spans in tweet " + tw.id);
    }
  }
  return c;
}

const EntityMention& Corpus::mention(std::size_t m) const {
  const auto t = mention_tweet_.at(m);
  return tweets_[t].entities[m - first_mention_[t]];
}

std::optional<std::size_t> Corpus::author_index(std::string_view id) const {
  const auto it = author_index_.find(std::string(id));
  if (it == author_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Corpus::tweet_index(std::string_view id) const {
  const auto it = tweet_index_.find(std::string(id));
  if (it == tweet_index_.end()) return std::nullopt;
  return it->second;
}

Corpus parse_corpus(std::string_view jsonl) {
  std::vector<Author> authors;
  std::vector<Tweet> tweets;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = detail::trim(jsonl.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail_line(line_no, std::string("JSON parse error: ") + e.what());
    }
    if (!obj.is_object()) fail_line(line_no, "record must be a JSON object");
    const auto type = obj.find("type");
    if (type == obj.end() || !type->is_string()) fail_line(line_no, "missing 'type' discriminator");
    if (*type == "author") {
      authors.push_back(parse_author(obj, line_no));
    } else if (*type == "tweet") {
      tweets.push_back(parse_tweet(obj, line_no));
    } else {
      fail_line(line_no, "unknown record type '" + type->get<std::string>() + "'");
    }
  }
  return Corpus::from_records(std::move(authors), std::move(tweets));
}

Corpus load_corpus(const std::filesystem::path& path) { return parse_corpus(detail::read_file(path)); }

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& a : corpus.authors()) {
    out += author_to_json(a).dump();
    out += '\n';
  }
  for (const auto& t : corpus.tweets()) {
    out += tweet_to_json(t).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  detail::write_file(path, serialize_corpus(corpus));
}

Corpus strip_labels(const Corpus& corpus) {
  auto authors = corpus.authors();
  auto tweets = corpus.tweets();
  for (auto& a : authors) a.gold_stance.reset();
  for (auto& t : tweets) {
    t.gold_stance.reset();
    t.gold_ambiguous.reset();
    for (auto& m : t.entities) m.gold.reset();
  }
  return Corpus::from_records(std::move(authors), std::move(tweets));
}

Corpus merge_corpora(const Corpus& a, const Corpus& b) {
  auto authors = a.authors();
  auto tweets = a.tweets();
  authors.insert(authors.end(), b.authors().begin(), b.authors().end());
  tweets.insert(tweets.end(), b.tweets().begin(), b.tweets().end());
  return Corpus::from_records(std::move(authors), std::move(tweets));
}

AuthorSplit split_by_author(const Corpus& corpus, std::size_t n_train_authors, std::uint64_t seed) {
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < corpus.authors().size(); ++i) {
    const auto& a = corpus.authors()[i];
    if (a.gold_stance && !a.imaginary) labeled.push_back(i);
  }
  if (n_train_authors > labeled.size()) {
    throw DataError("insufficient labeled authors: need " + std::to_string(n_train_authors) + ", have " +
                    std::to_string(labeled.size()));
  }
  // Stratified by stance: each stance gets its proportional share of the sample
  // (largest remainder, ties to the lower stance code), drawn uniformly within it.
  std::array<std::vector<std::size_t>, kNumStances> strata;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    strata[code(*corpus.authors()[labeled[i]].gold_stance)].push_back(i);
  }
  std::array<std::size_t, kNumStances> quota{};
  std::array<std::size_t, kNumStances> remainder{};
  std::size_t allocated = 0;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const auto scaled = n_train_authors * strata[s].size();
    quota[s] = labeled.empty() ? 0 : scaled / labeled.size();
    remainder[s] = labeled.empty() ? 0 : scaled % labeled.size();
    allocated += quota[s];
  }
  while (allocated < n_train_authors) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < strata.size(); ++s) {
      if (remainder[s] > remainder[best]) best = s;
    }
    ++quota[best];
    remainder[best] = 0;
    ++allocated;
  }

  Rng rng(derive_seed(seed, 0x5EED));
  std::vector<bool> is_train(labeled.size(), false);
  for (std::size_t s = 0; s < strata.size(); ++s) {
    for (const auto p : rng.sample_indices(strata[s].size(), quota[s])) is_train[strata[s][p]] = true;
  }

  AuthorSplit split;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    (is_train[i] ? split.train_authors : split.test_authors).push_back(labeled[i]);
  }
  for (const auto a : split.train_authors) {
    const auto& ts = corpus.author_tweets(a);
    split.train_tweets.insert(split.train_tweets.end(), ts.begin(), ts.end());
  }
  for (const auto a : split.test_authors) {
    const auto& ts = corpus.author_tweets(a);
    split.test_tweets.insert(split.test_tweets.end(), ts.begin(), ts.end());
  }
  std::sort(split.train_tweets.begin(), split.train_tweets.end());
  std::sort(split.test_tweets.begin(), split.test_tweets.end());
  return split;
}

bool tweet_has_keyword(const Tweet& tweet, std::string_view lower_keyword) {
  if (detail::contains_ci(tweet.text, lower_keyword)) return true;
  return std::any_of(tweet.hashtags.begin(), tweet.hashtags.end(),
                     [&](const std::string& h) { return detail::contains_ci(h, lower_keyword); });
}

std::set<std::size_t> flag_ambiguous(const Corpus& corpus) {
  std::set<std::size_t> out;
  for (std::size_t t = 0; t < corpus.tweets().size(); ++t) {
    const auto& tw = corpus.tweets()[t];
    if (!tw.gold_stance) continue;
    const auto opp_keyword = *tw.gold_stance == Stance::ProBlackLM ? kBlueKeyword : kBlackKeyword;
    if (tweet_has_keyword(tw, opp_keyword)) out.insert(t);
  }
  return out;
}

}  // namespace perspectra
