#include "perspectra/synthgen.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "perspectra/error.hpp"
#include "perspectra/rng.hpp"

namespace perspectra {
namespace {

std::string format_id(const std::string& prefix, char kind, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", kind, width, n);
  return prefix + buf;
}

std::chrono::sys_days parse_day(const std::string& s) {
  if (s.size() != 10) throw UsageError("start_date must be YYYY-MM-DD");
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw UsageError("invalid start_date " + s);
  return std::chrono::sys_days{ymd};
}

std::string format_day(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError(std::string(name) + " must be in [0,1]");
}

const std::vector<std::string> kLeftDomains{"nytimes.com", "cnn.com", "msnbc.com", "huffpost.com", "vox.com"};
const std::vector<std::string> kRightDomains{"foxnews.com", "breitbart.com", "dailywire.com", "newsmax.com",
                                             "theblaze.com"};

class Generator {
 public:
  Generator(const GenConfig& cfg, const Lexicon& lex, const PerspectiveTable& table)
      : cfg_(cfg), lex_(lex), table_(table), rng_(derive_seed(cfg.seed, 0x6E4)), start_(parse_day(cfg.start_date)) {
    prefix_ = cfg.id_prefix;
    if (prefix_.empty() && cfg.mode == GenMode::WeakSupervision) prefix_ = "w";
    for (const auto s : kAllStances) {
      const auto& set = table.lookup(s);
      perspectives_[code(s)].assign(set.begin(), set.end());
    }
  }

  Corpus run() {
    if (cfg_.mode == GenMode::WeakSupervision) {
      generate_weak();
    } else {
      generate_real();
    }
    return Corpus::from_records(std::move(authors_), std::move(tweets_));
  }

 private:
  void require_perspectives(Stance s) const {
    if (perspectives_[code(s)].empty()) {
      throw DataError("perspective table has no entries for " + std::string(to_string(s)));
    }
  }

  void generate_real() {
    std::vector<Stance> stances(cfg_.n_authors);
    for (auto& s : stances) s = rng_.bernoulli(cfg_.stance_mix) ? Stance::ProBlackLM : Stance::ProBlueLM;
    std::array<std::vector<std::size_t>, kNumStances> by_stance;
    for (std::size_t i = 0; i < stances.size(); ++i) {
      require_perspectives(stances[i]);
      by_stance[code(stances[i])].push_back(i);
    }

    for (std::size_t i = 0; i < cfg_.n_authors; ++i) {
      const Stance s = stances[i];
      Author a;
      a.id = format_id(prefix_, 'a', i, 4);
      a.gold_stance = s;
      if (rng_.bernoulli(cfg_.profile_rate)) {
        const auto n_kw = static_cast<std::size_t>(rng_.between(1, 3));
        std::string profile;
        for (std::size_t k = 0; k < n_kw; ++k) {
          const auto& pool = rng_.bernoulli(0.7) ? lex_.profile_keywords[code(s)] : lex_.neutral_keywords;
          if (pool.empty()) continue;
          const auto& kw = rng_.pick(pool);
          if (std::find(a.keywords.begin(), a.keywords.end(), kw) != a.keywords.end()) continue;
          a.keywords.push_back(kw);
          if (!profile.empty()) profile += " | ";
          profile += kw;
        }
        if (!profile.empty()) a.profile = profile;
      }

      // Geometric(0.5) on {1, 2, ...}, capped at 5.
      int n_retweets = 1;
      while (n_retweets < 5 && rng_.bernoulli(0.5)) ++n_retweets;
      for (int r = 0; r < n_retweets; ++r) {
        const Stance target_stance = rng_.bernoulli(cfg_.retweet_homophily) ? s : opponent(s);
        const auto& pool = by_stance[code(target_stance)];
        if (pool.empty()) continue;
        const auto j = rng_.pick(pool);
        if (j == i) continue;
        const auto id = format_id(prefix_, 'a', j, 4);
        if (std::find(a.retweets.begin(), a.retweets.end(), id) == a.retweets.end()) a.retweets.push_back(id);
      }

      if (cfg_.behavior_alignment) {
        const double p_aligned = 0.5 + 0.5 * *cfg_.behavior_alignment;
        const Party own = s == Stance::ProBlackLM ? Party::Democrat : Party::Republican;
        const Party other = own == Party::Democrat ? Party::Republican : Party::Democrat;
        std::vector<Follow> follows;
        const auto n_follow = rng_.between(1, 6);
        for (std::int64_t f = 0; f < n_follow; ++f) {
          const Party party = rng_.bernoulli(p_aligned) ? own : other;
          const auto n = rng_.below(50);
          follows.push_back({std::string("pol_") + (party == Party::Democrat ? "d" : "r") + std::to_string(n), party});
        }
        a.follows = std::move(follows);
      }

      const auto n_tweets = static_cast<std::size_t>(
          rng_.between(static_cast<std::int64_t>(cfg_.tweets_min), static_cast<std::int64_t>(cfg_.tweets_max)));
      for (std::size_t k = 0; k < n_tweets; ++k) {
        const auto& p = rng_.pick(perspectives_[code(s)]);
        make_tweet(a.id, s, [&](std::size_t) { return rng_.pick(perspectives_[code(s)]); }, p);
      }
      authors_.push_back(std::move(a));
    }
  }

  void generate_weak() {
    for (const auto s : kAllStances) require_perspectives(s);
    for (const auto s : kAllStances) {
      for (const auto& p : perspectives_[code(s)]) {
        Author a;
        a.id = prefix_ + "imag_" + std::string(to_string(s)) + "_" + to_string(p);
        a.gold_stance = s;
        a.imaginary = true;
        for (std::size_t k = 0; k < cfg_.weak_tweets_per_tuple; ++k) {
          make_tweet(a.id, s, [&](std::size_t) { return p; }, p);
        }
        authors_.push_back(std::move(a));
      }
    }
  }

  int draw_mention_count() {
    const double q = (cfg_.entity_rate - 1.0) / 2.0;
    return 1 + (rng_.bernoulli(q) ? 1 : 0) + (rng_.bernoulli(q) ? 1 : 0);
  }

  std::string draw_surface(const Perspective& p, Stance s) {
    std::string base;
    std::vector<const AmbiguousSurface*> amb;
    for (const auto& a : lex_.ambiguous) {
      if (a.per_stance[code(s)] == p.entity) amb.push_back(&a);
    }
    if (!amb.empty() && rng_.bernoulli(cfg_.ambiguous_surface_rate)) {
      base = rng_.pick(amb)->surface;
    } else {
      base = rng_.pick(lex_.entity_surfaces[code(p.entity)]);
    }
    if (rng_.bernoulli(cfg_.cue_rate)) {
      return rng_.pick(lex_.modifiers[frame_index(p.sentiment, p.role)]) + " " + base;
    }
    return base;
  }

  std::string draw_date(Stance s) {
    int day;
    if (s == Stance::ProBlueLM && cfg_.time_ramp > 0.0) {
      // Density proportional to 1 + ramp * (2x - 1) over the window, by rejection.
      for (;;) {
        const double x = rng_.uniform();
        if (rng_.uniform() * (1.0 + cfg_.time_ramp) < 1.0 + cfg_.time_ramp * (2.0 * x - 1.0)) {
          day = static_cast<int>(x * cfg_.days);
          break;
        }
      }
    } else {
      day = static_cast<int>(rng_.below(static_cast<std::uint64_t>(cfg_.days)));
    }
    return format_day(start_ + std::chrono::days{day});
  }

  template <typename DrawPerspective>
  void make_tweet(const std::string& author_id, Stance s, DrawPerspective&& extra, const Perspective& first) {
    Tweet t;
    t.id = format_id(prefix_, 't', tweets_.size(), 6);
    t.author_id = author_id;
    t.gold_stance = s;
    t.timestamp = draw_date(s);

    const int n_mentions = draw_mention_count();
    for (int k = 0; k < n_mentions; ++k) {
      const Perspective p = k == 0 ? first : extra(static_cast<std::size_t>(k));
      const auto& templ = rng_.pick(lex_.templates[frame_index(p.sentiment, p.role)]);
      const auto slot = templ.find("{E}");
      const auto surface = draw_surface(p, s);
      if (!t.text.empty()) t.text += ". ";
      t.text += templ.substr(0, slot);
      EntityMention m;
      m.id = format_id(prefix_, 'm', mention_counter_++, 7);
      m.start = t.text.size();
      t.text += surface;
      m.end = t.text.size();
      m.surface = surface;
      m.gold = p;
      t.text += templ.substr(slot + 3);
      t.entities.push_back(std::move(m));
    }
    if (rng_.bernoulli(cfg_.frame_rate)) {
      t.text += ". ";
      t.text += rng_.pick(lex_.frames[code(s)]);
    }

    const bool hijack = rng_.bernoulli(cfg_.ambiguous_rate);
    t.gold_ambiguous = hijack;
    const auto add_tag = [&](const std::string& tag) {
      if (std::find(t.hashtags.begin(), t.hashtags.end(), tag) == t.hashtags.end()) t.hashtags.push_back(tag);
    };
    const auto non_signature = [&](Stance camp) {
      std::vector<std::string> out;
      for (const auto& h : lex_.stance_hashtags[code(camp)]) {
        if (h != signature_keyword(camp)) out.push_back(h);
      }
      return out;
    };
    if (hijack) {
      // Hijacked tweets carry the opponent's signature and no own-camp stance hashtag.
      const Stance opp = opponent(s);
      add_tag(std::string(signature_keyword(opp)));
      if (rng_.bernoulli(0.5)) add_tag(rng_.pick(non_signature(opp)));
    } else {
      if (rng_.bernoulli(cfg_.signature_rate)) add_tag(std::string(signature_keyword(s)));
      const auto pool = non_signature(s);
      add_tag(rng_.pick(pool));
      if (rng_.bernoulli(0.3)) add_tag(rng_.pick(pool));
    }
    if (!lex_.neutral_hashtags.empty() && rng_.bernoulli(0.2)) add_tag(rng_.pick(lex_.neutral_hashtags));
    for (const auto& h : t.hashtags) {
      t.text += " #";
      t.text += h;
    }

    if (cfg_.behavior_alignment) {
      std::vector<MediaShare> shares;
      if (rng_.bernoulli(0.3)) {
        const bool aligned = rng_.bernoulli(0.5 + 0.5 * *cfg_.behavior_alignment);
        const bool left = (s == Stance::ProBlackLM) == aligned;
        shares.push_back({rng_.pick(left ? kLeftDomains : kRightDomains), left ? MediaBias::Left : MediaBias::Right});
      }
      t.domains = std::move(shares);
    }
    tweets_.push_back(std::move(t));
  }

  const GenConfig& cfg_;
  const Lexicon& lex_;
  const PerspectiveTable& table_;
  Rng rng_;
  std::chrono::sys_days start_;
  std::string prefix_;
  std::array<std::vector<Perspective>, kNumStances> perspectives_;
  std::vector<Author> authors_;
  std::vector<Tweet> tweets_;
  std::size_t mention_counter_ = 0;
};

}  // namespace

void GenConfig::validate() const {
  check_prob(stance_mix, "stance_mix");
  check_prob(ambiguous_rate, "ambiguous_rate");
  check_prob(retweet_homophily, "retweet_homophily");
  check_prob(signature_rate, "signature_rate");
  check_prob(cue_rate, "cue_rate");
  check_prob(frame_rate, "frame_rate");
  check_prob(ambiguous_surface_rate, "ambiguous_surface_rate");
  check_prob(profile_rate, "profile_rate");
  check_prob(time_ramp, "time_ramp");
  if (behavior_alignment) check_prob(*behavior_alignment, "behavior_alignment");
  if (tweets_min > tweets_max) throw UsageError("tweets_min must not exceed tweets_max");
  if (!(entity_rate >= 1.0 && entity_rate <= 3.0)) throw UsageError("entity_rate must be in [1,3]");
  if (days < 1) throw UsageError("days must be positive");
  parse_day(start_date);
}

Corpus generate(const GenConfig& cfg, const Lexicon& lexicon, const PerspectiveTable& table) {
  cfg.validate();
  lexicon.validate(table);
  return Generator(cfg, lexicon, table).run();
}

OracleLabels oracle_labels(const Corpus& corpus) {
  OracleLabels out;
  for (const auto& a : corpus.authors()) {
    if (a.gold_stance) out.author_stances.emplace_back(a.id, *a.gold_stance);
  }
  for (const auto& t : corpus.tweets()) {
    if (!t.gold_stance) throw DataError("tweet " + t.id + " has no gold stance");
    out.tweet_stances.emplace_back(t.id, *t.gold_stance);
    out.ambiguous.emplace_back(t.id, t.gold_ambiguous.value_or(false));
    for (const auto& m : t.entities) {
      if (!m.gold) throw DataError("entity " + m.id + " has no gold perspective");
      out.mentions.push_back({m.id, t.id, *m.gold});
    }
  }
  return out;
}

std::string OracleLabels::to_csv() const {
  std::string out = "kind,id,label\n";
  for (const auto& [id, s] : author_stances) out += "author," + id + "," + std::string(to_string(s)) + "\n";
  for (const auto& [id, s] : tweet_stances) out += "tweet," + id + "," + std::string(to_string(s)) + "\n";
  for (const auto& [id, amb] : ambiguous) out += "ambiguous," + id + "," + (amb ? "1" : "0") + "\n";
  for (const auto& m : mentions) out += "mention," + m.mention_id + "," + to_string(m.triple) + "\n";
  return out;
}

}  // namespace perspectra
