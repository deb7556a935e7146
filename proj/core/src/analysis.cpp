#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "perspectra/error.hpp"
#include "perspectra/eval.hpp"

namespace perspectra {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Undefined correlations (one group empty, constant series) are reported as NaN.
double maybe_r(const std::vector<int>& binary, const std::vector<double>& continuous) {
  try {
    return point_biserial(binary, continuous);
  } catch (const DataError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

std::string PmiReport::to_csv() const {
  std::ostringstream out;
  out << "stance,perspective,pmi,count\n";
  for (const auto& e : entries) {
    out << to_string(e.stance) << ',' << to_string(e.perspective) << ',' << fmt(e.pmi) << ',' << e.count << '\n';
  }
  return out.str();
}

PmiReport pmi(std::span<const StancedPerspectives> tweets, double min_frac) {
  std::map<Perspective, std::size_t> overall;
  std::map<Perspective, std::size_t> by_stance[kNumStances];
  std::size_t stance_total[kNumStances] = {0, 0};
  std::size_t total = 0;
  for (const auto& t : tweets) {
    const auto s = static_cast<std::size_t>(code(t.stance));
    for (const auto& p : t.perspectives) {
      ++overall[p];
      ++by_stance[s][p];
      ++stance_total[s];
      ++total;
    }
  }
  if (total == 0) throw DataError("pmi: no perspective occurrences");

  PmiReport report;
  report.min_frac = min_frac;
  report.total = total;
  for (const auto stance : kAllStances) {
    const auto s = static_cast<std::size_t>(code(stance));
    std::vector<PmiEntry> group;
    for (const auto& [p, n] : by_stance[s]) {
      const double px = static_cast<double>(overall.at(p)) / static_cast<double>(total);
      if (px < min_frac) continue;
      const double pxs = static_cast<double>(n) / static_cast<double>(stance_total[s]);
      group.push_back({p, stance, std::log(pxs / px), n});
    }
    std::stable_sort(group.begin(), group.end(), [](const PmiEntry& a, const PmiEntry& b) { return a.pmi > b.pmi; });
    report.entries.insert(report.entries.end(), group.begin(), group.end());
  }
  return report;
}

double point_biserial(std::span<const int> binary, std::span<const double> continuous) {
  if (binary.size() != continuous.size()) throw DataError("point_biserial: series lengths differ");
  const auto n = static_cast<double>(binary.size());
  double sum1 = 0, sum0 = 0, n1 = 0, n0 = 0, mean = 0;
  for (std::size_t i = 0; i < binary.size(); ++i) {
    if (binary[i] != 0 && binary[i] != 1) throw DataError("point_biserial: binary series must be 0/1");
    (binary[i] ? sum1 : sum0) += continuous[i];
    (binary[i] ? n1 : n0) += 1;
    mean += continuous[i];
  }
  if (n1 == 0 || n0 == 0) throw DataError("undefined correlation: binary series has a single group");
  mean /= n;
  double var = 0;
  for (const double x : continuous) var += (x - mean) * (x - mean);
  var /= n;
  if (var == 0) throw DataError("undefined correlation: continuous series is constant");
  const double p = n1 / n;
  return (sum1 / n1 - sum0 / n0) / std::sqrt(var) * std::sqrt(p * (1 - p));
}

std::string BehaviorCorrelations::to_csv() const {
  std::ostringstream out;
  out << "stance,behavior,r,authors\n";
  out << "pro_blacklm,follow_democrat," << fmt(black_democrat) << ',' << follow_authors << '\n';
  out << "pro_bluelm,follow_republican," << fmt(blue_republican) << ',' << follow_authors << '\n';
  out << "pro_blacklm,share_left_media," << fmt(black_left) << ',' << media_authors << '\n';
  out << "pro_bluelm,share_right_media," << fmt(blue_right) << ',' << media_authors << '\n';
  return out.str();
}

BehaviorCorrelations behavior_correlations(const Corpus& corpus, std::span<const std::optional<Stance>> authors) {
  if (authors.size() != corpus.authors().size()) throw DataError("behavior_correlations: one stance per author expected");
  std::vector<int> follow_black, follow_blue, media_black, media_blue;
  std::vector<double> dem, rep, left, right;
  BehaviorCorrelations out;
  for (std::size_t a = 0; a < authors.size(); ++a) {
    const auto& author = corpus.authors()[a];
    if (author.imaginary || !authors[a]) continue;
    const int black = *authors[a] == Stance::ProBlackLM ? 1 : 0;
    bool used = false;
    if (author.follows && !author.follows->empty()) {
      const auto d = std::count_if(author.follows->begin(), author.follows->end(),
                                   [](const Follow& f) { return f.party == Party::Democrat; });
      const double frac = static_cast<double>(d) / static_cast<double>(author.follows->size());
      follow_black.push_back(black);
      follow_blue.push_back(1 - black);
      dem.push_back(frac);
      rep.push_back(1 - frac);
      used = true;
    }
    std::size_t shares = 0, left_shares = 0;
    for (const auto t : corpus.author_tweets(a)) {
      const auto& domains = corpus.tweets()[t].domains;
      if (!domains) continue;
      for (const auto& d : *domains) {
        ++shares;
        left_shares += d.bias == MediaBias::Left ? 1 : 0;
      }
    }
    if (shares > 0) {
      const double frac = static_cast<double>(left_shares) / static_cast<double>(shares);
      media_black.push_back(black);
      media_blue.push_back(1 - black);
      left.push_back(frac);
      right.push_back(1 - frac);
      used = true;
    }
    if (!used) ++out.skipped_authors;
  }
  if (dem.empty() && left.empty()) throw DataError("no behavioral metadata");
  out.follow_authors = dem.size();
  out.media_authors = left.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.black_democrat = dem.empty() ? nan : maybe_r(follow_black, dem);
  out.blue_republican = dem.empty() ? nan : maybe_r(follow_blue, rep);
  out.black_left = left.empty() ? nan : maybe_r(media_black, left);
  out.blue_right = left.empty() ? nan : maybe_r(media_blue, right);
  return out;
}

std::string temporal_trends(const Corpus& corpus, std::span<const Stance> tweet_stances,
                            std::span<const std::optional<Perspective>> mention_perspectives) {
  if (tweet_stances.size() != corpus.tweets().size() || mention_perspectives.size() != corpus.num_mentions()) {
    throw DataError("temporal_trends: labels do not match the corpus");
  }
  struct FrameDay {
    std::size_t tweets = 0;                           // tweets using the frame
    std::map<AbstractEntity, std::size_t> entities;  // of those, tweets mentioning each entity
  };
  struct Day {
    std::size_t stance_counts[kNumStances] = {0, 0};
    std::map<std::pair<int, std::pair<int, int>>, FrameDay> frames;  // (stance, (sentiment, role))
  };
  std::map<std::string, Day> days;
  for (std::size_t t = 0; t < tweet_stances.size(); ++t) {
    auto& day = days[corpus.tweets()[t].timestamp];
    const int s = code(tweet_stances[t]);
    ++day.stance_counts[s];
    std::map<std::pair<int, int>, std::set<AbstractEntity>> used;
    const auto first = corpus.first_mention(t);
    for (std::size_t k = 0; k < corpus.tweets()[t].entities.size(); ++k) {
      if (const auto& p = mention_perspectives[first + k]) used[{code(p->sentiment), code(p->role)}].insert(p->entity);
    }
    for (const auto& [frame, entities] : used) {
      auto& fd = day.frames[{s, frame}];
      ++fd.tweets;
      for (const auto e : entities) ++fd.entities[e];
    }
  }

  std::ostringstream out;
  out << "date,series,stance,frame,key,share\n";
  char buf[32];
  auto share = [&](std::size_t num, std::size_t den) {
    std::snprintf(buf, sizeof buf, "%.9f", static_cast<double>(num) / static_cast<double>(den));
    return std::string(buf);
  };
  for (const auto& [date, day] : days) {
    const auto total = day.stance_counts[0] + day.stance_counts[1];
    for (const auto stance : kAllStances) {
      out << date << ",stance," << to_string(stance) << ",,," << share(day.stance_counts[code(stance)], total) << '\n';
    }
    for (const auto& [key, fd] : day.frames) {
      const auto stance = static_cast<Stance>(key.first);
      const std::string frame = std::string(to_string(static_cast<Sentiment>(key.second.first))) + "_" +
                                std::string(to_string(static_cast<Role>(key.second.second)));
      for (const auto& [entity, n] : fd.entities) {
        out << date << ",perspective," << to_string(stance) << ',' << frame << ',' << to_string(entity) << ','
            << share(n, fd.tweets) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace perspectra
