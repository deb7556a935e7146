#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "perspectra/corpus.hpp"
#include "perspectra/eval.hpp"
#include "perspectra/featurize.hpp"
#include "perspectra/lexicon.hpp"
#include "perspectra/perspective_table.hpp"
#include "perspectra/priors.hpp"
#include "perspectra/selftrain.hpp"
#include "perspectra/synthgen.hpp"

namespace perspectra {

/// Where the seed labels come from: gold labels of sampled real authors, or a
/// generated corpus of imaginary authors merged into the training graph.
enum class SupervisionMode : std::uint8_t { Direct, Weak };

std::string_view to_string(SupervisionMode m);
std::optional<SupervisionMode> parse_supervision_mode(std::string_view token);

/// Model variants compared in the ablation study.
enum class Variant : std::uint8_t { TextAsGraph, AuthorNetwork, Full };

std::string_view to_string(Variant v);

struct ExperimentConfig {
  GenConfig gen;  // corpus recipe when no corpus file is given
  ModelConfig model;
  SelfTrainConfig train;
  PriorTrainConfig prior;
  SupervisionMode mode = SupervisionMode::Direct;
  std::size_t train_authors = 10;
  std::uint64_t seed = 1000;       // drives the split, initialization and feature sampling
  std::size_t prior_authors = 60;  // size of the corpus the priors are pretrained on
};

/// `base` adjusted for an ablation variant. The two supervised-only variants stop
/// after warm-up and get a longer warm-up budget.
ExperimentConfig variant_config(ExperimentConfig base, Variant v);

/// Weak-supervision seed corpus derived from the corpus recipe.
Corpus weak_seed_corpus(const GenConfig& gen, const Lexicon& lexicon, const PerspectiveTable& table);

/// Corpus the prior classifiers are pretrained on: its own seed and id prefix, every
/// mention carrying a sentiment/role cue.
Corpus prior_corpus(const GenConfig& gen, std::size_t n_authors, const Lexicon& lexicon, const PerspectiveTable& table);

/// Hashed mention-surface features, one row per mention, multiplied by `scale`.
Matrix<float> mention_features(const Corpus& corpus, const Featurizer& f, double scale);

/// Pretrains the sentiment and role priors on the gold triples of `corpus`.
PriorFit fit_priors(const Corpus& corpus, const Featurizer& f, double scale, const PriorTrainConfig& cfg);

/// One training run: corpus, split, seeds, features, priors and the trainer.
class Experiment {
 public:
  /// `weak_seed` is generated from cfg.gen when absent in weak mode.
  Experiment(ExperimentConfig cfg, Corpus corpus, std::optional<Corpus> weak_seed, const Lexicon& lexicon,
             PerspectiveTable table);

  SelfTrainer& trainer() { return *trainer_; }
  const SelfTrainer& trainer() const { return *trainer_; }
  const ExperimentConfig& config() const { return cfg_; }
  const Corpus& corpus() const { return corpus_; }
  const AuthorSplit& split() const { return split_; }
  const PriorFit& priors() const { return priors_; }
  const PerspectiveTable& table() const { return table_; }

  PredictedLabels predicted() const;
  TaskReport evaluate() const;
  TaskReport evaluate_keyword() const;

  /// Trainer state plus run metadata needed to rebuild inputs for inference.
  Checkpoint checkpoint() const;

 private:
  ExperimentConfig cfg_;
  PerspectiveTable table_;
  Corpus corpus_;
  AuthorSplit split_;
  NodeFeatures features_;
  PriorFit priors_;
  std::unique_ptr<SelfTrainer> trainer_;
};

/// Rebuilds graph and features for `corpus` as recorded in `ckpt` and runs the model.
/// Throws DataError when the checkpoint does not fit the corpus.
Predictions<float> infer_from_checkpoint(const Corpus& corpus, const Checkpoint& ckpt);

/// The author split of a run: `train_authors` gold authors sampled with `seed`, the rest held out.
AuthorSplit run_split(const Corpus& corpus, const ExperimentConfig& cfg);

/// The split recorded in a checkpoint written by Experiment::checkpoint.
AuthorSplit checkpoint_split(const Corpus& corpus, const Checkpoint& ckpt);

}  // namespace perspectra
