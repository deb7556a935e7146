#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "perspectra/numkit/adamw.hpp"
#include "perspectra/numkit/matrix.hpp"

namespace perspectra {

struct PriorTrainConfig {
  std::size_t batch_size = 32;
  double lr = 0.0005;
  double weight_decay = 0.01;
  double validation_fraction = 0.2;
  std::size_t patience = 3;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 1000;
};

/// Linear sentiment and role classifiers over frozen mention features.
struct PriorWeights {
  Matrix<float> sentiment;  // d x 2
  Matrix<float> role;       // d x 2
};

struct PriorFit {
  PriorWeights weights;
  double sentiment_accuracy = 0;  // on the validation split
  double role_accuracy = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
};

/// Mini-batch AdamW on cross-entropy with an 80/20 train/validation split; stops
/// once the mean validation accuracy has not improved for `patience` epochs and
/// returns the best weights. Throws DataError on an empty set.
PriorFit pretrain_priors(const Matrix<float>& features, std::span<const int> sentiment, std::span<const int> role,
                         const PriorTrainConfig& cfg);

/// One shuffled mini-batch pass over the rows with mask 1 (the refresh step of the
/// self-learning loop). `opt` holds the moments of [sentiment, role].
void prior_pass(PriorWeights& weights, AdamWState<float>& opt, const Matrix<float>& features,
                std::span<const int> sentiment, std::span<const int> role, std::span<const std::uint8_t> mask,
                std::size_t batch_size, std::uint64_t seed);

/// Fraction of rows whose argmax under `w` equals the label.
double prior_accuracy(const Matrix<float>& w, const Matrix<float>& features, std::span<const int> labels);

/// Frame index (sentiment, role) of each row under the current classifiers.
std::vector<std::uint8_t> prior_frames(const PriorWeights& weights, const Matrix<float>& features);

}  // namespace perspectra
