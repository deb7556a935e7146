#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perspectra/checkpoint.hpp"
#include "perspectra/corpus.hpp"
#include "perspectra/featurize.hpp"
#include "perspectra/graph.hpp"
#include "perspectra/labels.hpp"
#include "perspectra/model.hpp"
#include "perspectra/perspective_table.hpp"
#include "perspectra/priors.hpp"

namespace perspectra {

struct SelfTrainConfig {
  std::size_t k = 10;  // epochs between inference steps
  double confidence_high = 0.9;
  double confidence_low = 0.8;
  std::size_t confidence_switch_epoch = 200;  // high through this epoch, low afterwards
  /// (first epoch, author tweet threshold), ascending by epoch.
  std::vector<std::pair<std::size_t, std::size_t>> author_thresholds{{1, 10}, {20, 5}, {50, 3}};
  double stop_fraction = 0.003;
  std::size_t stop_patience = 10;  // consecutive inference steps below stop_fraction
  std::size_t max_epochs = 300;
  std::size_t warmup_patience = 3;
  std::size_t warmup_min_epochs = 0;
  std::size_t warmup_max_epochs = 50;
  bool self_learning = true;  // false: stop after warm-up (supervised-only ablations)
  bool refresh_mention_edges = true;
  std::size_t prior_batch_size = 32;

  double confidence_at(std::size_t epoch) const;
  std::size_t author_threshold_at(std::size_t epoch) const;
  /// Throws UsageError on inconsistent values.
  void validate() const;
};

/// Per item and head: max probability >= c.
struct Reliability {
  std::vector<std::uint8_t> tweet_stance;
  std::vector<std::uint8_t> sentiment;
  std::vector<std::uint8_t> role;
  std::vector<std::uint8_t> mapping;
};

Reliability check_reliable(const Predictions<float>& pred, double c);

Stance predicted_stance(const Predictions<float>& pred, std::size_t tweet);
Perspective predicted_perspective(const Predictions<float>& pred, std::size_t mention);

/// False unless the tweet's stance is reliable; otherwise true iff every mention with
/// reliable mapping, sentiment and role predicts a perspective the table allows for
/// the predicted stance. Tweets with no fully reliable mention pass.
bool check_tweet_consistency(const Corpus& corpus, std::size_t tweet, const Predictions<float>& pred,
                             const PerspectiveTable& table, const Reliability& rel);

/// The shared stance of an author's consistent tweets if they agree and number at least t.
std::optional<Stance> check_author_consistency(std::span<const Stance> consistent_stances, std::size_t t);

struct InferenceOutcome {
  std::size_t new_tweets = 0;
  std::size_t new_mentions = 0;
  double new_fraction = 0;
  std::vector<std::size_t> consistent_authors;
};

/// Applies the three checks in order and adds the consistent authors' consistent
/// tweets (stance = author stance) and their fully reliable mentions. Existing
/// labels are never overwritten.
InferenceOutcome apply_consistency(const Corpus& corpus, const Predictions<float>& pred,
                                   const PerspectiveTable& table, LabelSet& labels, double c, std::size_t t);

/// Majority vote per author; ties go to the larger summed probability, then to
/// pro-BlackLM. Authors without tweets get nullopt.
std::vector<std::optional<Stance>> predict_author_stances(const Corpus& corpus, const Predictions<float>& pred);

struct EpochRecord {
  std::size_t epoch = 0;
  LossTerms loss;
  std::size_t labelset_tweets = 0;
  std::size_t labelset_mentions = 0;
  std::optional<double> new_fraction;  // set on inference epochs
};

std::string metrics_csv(const std::vector<EpochRecord>& log);

/// The self-learning loop: warm-up, then {train k epochs; inference step} until the
/// new-label fraction stays below the threshold or the epoch cap is reached.
/// Holds the graph, model, optimizer and label state, so it can be checkpointed
/// and resumed at any epoch boundary.
class SelfTrainer {
 public:
  enum class Phase : std::uint8_t { Warmup, Loop, Done };

  SelfTrainer(const Corpus& corpus, const NodeFeatures& features, const PerspectiveTable& table, LabelSet seeds,
              ModelConfig model_cfg, SelfTrainConfig cfg, PriorWeights priors);

  SelfTrainer(const SelfTrainer&) = delete;
  SelfTrainer& operator=(const SelfTrainer&) = delete;

  /// Trains one epoch (plus an inference step when due). Returns false once done.
  bool step();
  /// Steps until done or until `until_epoch` epochs have run.
  void run(std::optional<std::size_t> until_epoch = std::nullopt);

  Phase phase() const { return phase_; }
  std::size_t epoch() const { return epoch_; }
  const std::string& stop_reason() const { return stop_reason_; }
  const std::vector<EpochRecord>& log() const { return log_; }
  const std::vector<std::size_t>& labelset_history() const { return labelset_history_; }
  const LabelSet& labels() const { return labels_; }
  const ModelParams<float>& params() const { return params_; }
  const HeteroGraph& graph() const { return *graph_; }
  const ModelConfig& model_config() const { return model_cfg_; }
  Predictions<float> predict() const;

  Checkpoint checkpoint() const;
  /// Restores model, optimizer, labels, mention typing and loop counters.
  /// Throws DataError if the checkpoint does not fit this corpus.
  void restore(const Checkpoint& ckpt);

 private:
  void train_epoch();
  void inference();
  void rebuild_inputs();

  const Corpus& corpus_;
  const NodeFeatures& features_;
  const PerspectiveTable& table_;
  ModelConfig model_cfg_;
  SelfTrainConfig cfg_;
  std::unique_ptr<HeteroGraph> graph_;
  ModelInputs<float> inputs_;
  Targets targets_;
  LabelSet labels_;
  ModelParams<float> params_;
  AdamWState<float> opt_;
  AdamWState<float> prior_opt_;

  Phase phase_ = Phase::Warmup;
  std::size_t epoch_ = 0;
  std::size_t loop_epochs_ = 0;
  double best_warmup_loss_ = 0;
  std::size_t warmup_since_best_ = 0;
  std::size_t low_steps_ = 0;
  std::string stop_reason_;
  std::vector<EpochRecord> log_;
  std::vector<std::size_t> labelset_history_;
};

/// Model tensors under `prefix` ("model.layer1.self_loop", ...).
void put_params(Checkpoint& ckpt, const ModelParams<float>& p, const std::string& prefix = "model.");
ModelParams<float> get_params(const Checkpoint& ckpt, const ModelConfig& cfg, const std::string& prefix = "model.");

void put_model_config(Checkpoint& ckpt, const ModelConfig& cfg);
ModelConfig get_model_config(const Checkpoint& ckpt);

}  // namespace perspectra
