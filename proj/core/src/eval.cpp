#include "perspectra/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "perspectra/error.hpp"
#include "perspectra/selftrain.hpp"
#include "text_util.hpp"

namespace perspectra {
namespace {

double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

F1Report f1(std::span<const int> pred, std::span<const int> gold, int num_classes) {
  if (pred.size() != gold.size()) throw DataError("f1: prediction and gold lengths differ");
  const auto k = static_cast<std::size_t>(num_classes);
  std::vector<std::size_t> tp(k, 0), predicted(k, 0), support(k, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= num_classes || gold[i] < 0 || gold[i] >= num_classes) {
      throw DataError("f1: unknown class " + std::to_string(pred[i] < 0 || pred[i] >= num_classes ? pred[i] : gold[i]));
    }
    ++predicted[static_cast<std::size_t>(pred[i])];
    ++support[static_cast<std::size_t>(gold[i])];
    if (pred[i] == gold[i]) ++tp[static_cast<std::size_t>(pred[i])];
  }
  F1Report r;
  r.count = pred.size();
  double weighted = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassScores s;
    s.precision = ratio(static_cast<double>(tp[c]), static_cast<double>(predicted[c]));
    s.recall = ratio(static_cast<double>(tp[c]), static_cast<double>(support[c]));
    s.f1 = ratio(2 * s.precision * s.recall, s.precision + s.recall);
    s.support = support[c];
    r.macro_f1 += s.f1;
    weighted += s.f1 * static_cast<double>(s.support);
    r.classes.push_back(s);
  }
  r.macro_f1 = k == 0 ? 0.0 : r.macro_f1 / static_cast<double>(k);
  r.weighted_f1 = ratio(weighted, static_cast<double>(pred.size()));
  return r;
}

Stance keyword_stance(const Tweet& tweet, Rng& rng) {
  const bool black = tweet_has_keyword(tweet, kBlackKeyword);
  const bool blue = tweet_has_keyword(tweet, kBlueKeyword);
  if (black && !blue) return Stance::ProBlackLM;
  if (blue && !black) return Stance::ProBlueLM;
  return rng.bernoulli(0.5) ? Stance::ProBlueLM : Stance::ProBlackLM;
}

std::vector<Stance> keyword_stances(const Corpus& corpus, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x4B57ULL));
  std::vector<Stance> out;
  out.reserve(corpus.tweets().size());
  for (const auto& t : corpus.tweets()) out.push_back(keyword_stance(t, rng));
  return out;
}

PredictedLabels predicted_labels(const Corpus& corpus, const Predictions<float>& pred) {
  PredictedLabels out;
  for (std::size_t t = 0; t < corpus.tweets().size(); ++t) out.tweets.push_back(predicted_stance(pred, t));
  out.authors = predict_author_stances(corpus, pred);
  for (std::size_t m = 0; m < corpus.num_mentions(); ++m) out.mentions.push_back(predicted_perspective(pred, m));
  return out;
}

std::vector<std::optional<Stance>> vote_author_stances(const Corpus& corpus, std::span<const Stance> tweets) {
  std::vector<std::optional<Stance>> out(corpus.authors().size());
  for (std::size_t a = 0; a < out.size(); ++a) {
    const auto& own = corpus.author_tweets(a);
    if (own.empty()) continue;
    std::size_t blue = 0;
    for (const auto t : own) blue += tweets[t] == Stance::ProBlueLM ? 1 : 0;
    out[a] = 2 * blue > own.size() ? Stance::ProBlueLM : Stance::ProBlackLM;
  }
  return out;
}

std::string preds_csv(const Corpus& corpus, const PredictedLabels& labels, const Predictions<float>* pred) {
  std::ostringstream out;
  out << "kind,id,label,confidence\n";
  auto conf = [](const Matrix<float>& m, std::size_t row) {
    const auto r = m.row(row);
    return fmt(*std::max_element(r.begin(), r.end()));
  };
  for (std::size_t a = 0; a < labels.authors.size(); ++a) {
    if (!labels.authors[a]) continue;
    out << "author," << corpus.authors()[a].id << ',' << to_string(*labels.authors[a]) << ",\n";
  }
  for (std::size_t t = 0; t < labels.tweets.size(); ++t) {
    out << "tweet," << corpus.tweets()[t].id << ',' << to_string(labels.tweets[t]) << ','
        << (pred ? conf(pred->tweet_stance, t) : "") << '\n';
  }
  for (std::size_t m = 0; m < labels.mentions.size(); ++m) {
    out << "mention," << corpus.mention(m).id << ',' << to_string(labels.mentions[m]) << ',';
    if (pred) {
      const double c = std::min({std::stod(conf(pred->mapping, m)), std::stod(conf(pred->sentiment, m)),
                                 std::stod(conf(pred->role, m))});
      out << fmt(c);
    }
    out << '\n';
  }
  return out.str();
}

PredictedLabels parse_preds_csv(const Corpus& corpus, const std::string& text) {
  std::unordered_map<std::string, std::size_t> mention_index;
  for (std::size_t m = 0; m < corpus.num_mentions(); ++m) mention_index.emplace(corpus.mention(m).id, m);

  PredictedLabels out;
  out.authors.resize(corpus.authors().size());
  std::vector<std::optional<Stance>> tweets(corpus.tweets().size());
  std::vector<std::optional<Perspective>> mentions(corpus.num_mentions());

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || detail::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() < 3) throw DataError("preds line " + std::to_string(line_no) + ": expected kind,id,label");
    const auto bad = [&](const std::string& what) {
      return DataError("preds line " + std::to_string(line_no) + ": " + what);
    };
    if (f[0] == "author" || f[0] == "tweet") {
      const auto s = parse_stance(f[2]);
      if (!s) throw bad("unknown stance " + f[2]);
      if (f[0] == "author") {
        const auto a = corpus.author_index(f[1]);
        if (!a) throw bad("unknown author " + f[1]);
        out.authors[*a] = *s;
      } else {
        const auto t = corpus.tweet_index(f[1]);
        if (!t) throw bad("unknown tweet " + f[1]);
        tweets[*t] = *s;
      }
    } else if (f[0] == "mention") {
      const auto it = mention_index.find(f[1]);
      if (it == mention_index.end()) throw bad("unknown mention " + f[1]);
      // Perspective strings are entity_sentiment_role; entity tokens may contain '_'.
      const auto last = f[2].rfind('_');
      const auto mid = last == std::string::npos ? std::string::npos : f[2].rfind('_', last - 1);
      if (mid == std::string::npos) throw bad("malformed perspective " + f[2]);
      const auto e = parse_entity(f[2].substr(0, mid));
      const auto s = parse_sentiment(f[2].substr(mid + 1, last - mid - 1));
      const auto r = parse_role(f[2].substr(last + 1));
      if (!e || !s || !r) throw bad("malformed perspective " + f[2]);
      mentions[it->second] = Perspective{*e, *s, *r};
    } else {
      throw bad("unknown kind " + f[0]);
    }
  }
  for (std::size_t t = 0; t < tweets.size(); ++t) {
    if (!tweets[t]) throw DataError("preds file has no row for tweet " + corpus.tweets()[t].id);
    out.tweets.push_back(*tweets[t]);
  }
  for (std::size_t m = 0; m < mentions.size(); ++m) {
    if (!mentions[m]) throw DataError("preds file has no row for mention " + corpus.mention(m).id);
    out.mentions.push_back(*mentions[m]);
  }
  return out;
}

std::string TaskReport::to_csv() const {
  std::ostringstream out;
  out << "task,macro_f1,weighted_f1,count\n";
  const std::pair<const char*, const F1Report*> rows[] = {
      {"author_stance", &author},  {"tweet_stance", &all_tweets}, {"ambiguous_tweet_stance", &ambiguous_tweets},
      {"entity_sentiment", &sentiment}, {"entity_role", &role},       {"entity_mapping", &mapping},
  };
  for (const auto& [name, r] : rows) {
    out << name << ',' << fmt(r->macro_f1) << ',' << fmt(r->weighted_f1) << ',' << r->count << '\n';
  }
  return out.str();
}

TaskReport evaluate_tasks(const Corpus& corpus, const PredictedLabels& labels,
                          std::span<const std::size_t> test_authors, std::span<const std::size_t> test_tweets) {
  TaskReport report;
  std::vector<int> pred, gold;
  for (const auto a : test_authors) {
    const auto& g = corpus.authors().at(a).gold_stance;
    if (!g || !labels.authors.at(a)) continue;
    pred.push_back(code(*labels.authors[a]));
    gold.push_back(code(*g));
  }
  report.author = f1(pred, gold, kNumStances);

  const auto ambiguous = flag_ambiguous(corpus);
  std::vector<int> amb_pred, amb_gold;
  pred.clear();
  gold.clear();
  std::vector<int> sp, sg, rp, rg, mp, mg;
  for (const auto t : test_tweets) {
    const auto& tweet = corpus.tweets().at(t);
    if (tweet.gold_stance) {
      pred.push_back(code(labels.tweets.at(t)));
      gold.push_back(code(*tweet.gold_stance));
      if (ambiguous.contains(t)) {
        amb_pred.push_back(pred.back());
        amb_gold.push_back(gold.back());
      }
    }
    if (labels.mentions.empty()) continue;
    for (std::size_t k = 0; k < tweet.entities.size(); ++k) {
      const auto& g = tweet.entities[k].gold;
      if (!g) continue;
      const auto& p = labels.mentions.at(corpus.first_mention(t) + k);
      sp.push_back(code(p.sentiment));
      sg.push_back(code(g->sentiment));
      rp.push_back(code(p.role));
      rg.push_back(code(g->role));
      mp.push_back(code(p.entity));
      mg.push_back(code(g->entity));
    }
  }
  report.all_tweets = f1(pred, gold, kNumStances);
  report.ambiguous_tweets = f1(amb_pred, amb_gold, kNumStances);
  report.sentiment = f1(sp, sg, kNumSentiments);
  report.role = f1(rp, rg, kNumRoles);
  report.mapping = f1(mp, mg, kNumEntities);
  return report;
}

}  // namespace perspectra
