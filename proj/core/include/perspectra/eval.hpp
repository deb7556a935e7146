#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perspectra/corpus.hpp"
#include "perspectra/model.hpp"
#include "perspectra/rng.hpp"
#include "perspectra/types.hpp"

namespace perspectra {

struct ClassScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct F1Report {
  std::vector<ClassScores> classes;
  double macro_f1 = 0;
  double weighted_f1 = 0;
  std::size_t count = 0;
};

/// One-vs-rest scores over classes 0..num_classes-1, with 0 for any 0/0 ratio.
/// Throws DataError on length mismatch or a label outside the class range.
F1Report f1(std::span<const int> pred, std::span<const int> gold, int num_classes);

/// Keyword rule: "blacklivesmatter" alone -> pro-BlackLM, "bluelivesmatter" alone ->
/// pro-BlueLM, otherwise a coin flip from `rng`. "alllivesmatter" plays no part.
Stance keyword_stance(const Tweet& tweet, Rng& rng);

/// Keyword predictions for every tweet, flipping coins from a stream seeded by `seed`.
std::vector<Stance> keyword_stances(const Corpus& corpus, std::uint64_t seed);

/// Hard labels derived from model outputs.
struct PredictedLabels {
  std::vector<Stance> tweets;
  std::vector<std::optional<Stance>> authors;
  std::vector<Perspective> mentions;
};

PredictedLabels predicted_labels(const Corpus& corpus, const Predictions<float>& pred);

/// Author stances by majority vote over the given tweet stances (ties to pro-BlackLM).
std::vector<std::optional<Stance>> vote_author_stances(const Corpus& corpus, std::span<const Stance> tweets);

/// `kind,id,label,confidence` rows for authors, tweets and mentions.
std::string preds_csv(const Corpus& corpus, const PredictedLabels& labels, const Predictions<float>* pred = nullptr);
/// Inverse of preds_csv. Throws DataError on unknown ids or missing rows.
PredictedLabels parse_preds_csv(const Corpus& corpus, const std::string& text);

/// The six evaluation columns: author stance, all-tweet stance, ambiguous-tweet
/// stance, entity sentiment, entity role and entity mapping.
struct TaskReport {
  F1Report author;
  F1Report all_tweets;
  F1Report ambiguous_tweets;
  F1Report sentiment;
  F1Report role;
  F1Report mapping;

  /// `task,macro_f1,weighted_f1,count` rows.
  std::string to_csv() const;
};

/// Scores `labels` against gold on the given test authors and tweets (mentions of
/// those tweets with gold triples; skipped when `labels.mentions` is empty). Ambiguous tweets are the flagged subset of the test tweets.
TaskReport evaluate_tasks(const Corpus& corpus, const PredictedLabels& labels,
                          std::span<const std::size_t> test_authors, std::span<const std::size_t> test_tweets);

// Discourse analyses.

struct PmiEntry {
  Perspective perspective;
  Stance stance{};
  double pmi = 0;
  std::size_t count = 0;  // occurrences with this stance
};

struct PmiReport {
  double min_frac = 0.005;
  std::size_t total = 0;
  std::vector<PmiEntry> entries;  // grouped by stance, PMI descending

  /// `stance,perspective,pmi,count` rows.
  std::string to_csv() const;
};

/// Perspectives used in one tweet and that tweet's stance.
struct StancedPerspectives {
  Stance stance{};
  std::vector<Perspective> perspectives;
};

/// I(x, s) = ln(P(x | s) / P(x)) over perspective occurrences; perspectives below
/// min_frac of all occurrences are dropped. Throws DataError if there are no occurrences.
PmiReport pmi(std::span<const StancedPerspectives> tweets, double min_frac = 0.005);

/// r = (M1 - M0) / s * sqrt(p q), s the population standard deviation.
/// Throws DataError when either group is empty or the continuous series is constant.
double point_biserial(std::span<const int> binary, std::span<const double> continuous);

struct BehaviorCorrelations {
  double black_democrat = 0;   // pro-BlackLM vs fraction of followed politicians who are Democrats
  double blue_republican = 0;  // pro-BlueLM vs fraction Republican
  double black_left = 0;       // pro-BlackLM vs fraction of shared media that is left-leaning
  double blue_right = 0;       // pro-BlueLM vs fraction right-leaning
  std::size_t follow_authors = 0;
  std::size_t media_authors = 0;
  std::size_t skipped_authors = 0;

  std::string to_csv() const;
};

/// Throws DataError("no behavioral metadata") when no author has follows or shares.
BehaviorCorrelations behavior_correlations(const Corpus& corpus, std::span<const std::optional<Stance>> authors);

/// Per-day stance shares, and for each stance and (sentiment, role) frame the share of
/// that day's tweets using the frame which mention each entity in it. CSV with header
/// `date,series,stance,frame,key,share`.
std::string temporal_trends(const Corpus& corpus, std::span<const Stance> tweet_stances,
                            std::span<const std::optional<Perspective>> mention_perspectives);

}  // namespace perspectra
