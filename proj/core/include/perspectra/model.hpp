#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "perspectra/graph.hpp"
#include "perspectra/numkit/adamw.hpp"
#include "perspectra/numkit/matrix.hpp"

namespace perspectra {

struct ModelConfig {
  std::size_t d_in = 256;
  std::size_t d_h1 = 100;
  std::size_t d_h2 = 50;
  double lr = 0.0005;
  double weight_decay = 0.01;
  /// Multiplies the unit-norm input features before they enter the network and the
  /// prior classifiers.
  double input_scale = 1.0;
  std::uint64_t seed = 1000;
  bool author_network = true;
};

/// Encoder weights (one matrix per relation and layer, no biases), the five
/// prediction heads and the two prior classifiers.
template <typename T>
struct ModelParams {
  std::array<Matrix<T>, kNumRelations> layer1;  // d_in x d_h1
  std::array<Matrix<T>, kNumRelations> layer2;  // d_h1 x d_h2
  Matrix<T> tweet_stance;                       // [author ; tweet] (2 d_h2) x 2
  Matrix<T> sentiment;                          // [mention ; tweet] (2 d_h2) x 2
  Matrix<T> role;                               // [mention ; tweet] (2 d_h2) x 2
  Matrix<T> mapping;                            // mention d_h2 x 11
  Matrix<T> entity_stance;                      // [mention ; tweet] (2 d_h2) x 2
  Matrix<T> prior_sentiment;                    // d_in x 2, on frozen input features
  Matrix<T> prior_role;                         // d_in x 2

  static ModelParams zeros(const ModelConfig& cfg);
  /// Glorot-uniform; every tensor draws from its own stream of `seed`.
  static ModelParams glorot(const ModelConfig& cfg, std::uint64_t seed);

  /// Calls f(name, matrix) for every tensor in a fixed order.
  template <typename F>
  void visit(F&& f) {
    visit_all(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_all(*this, f);
  }

  std::vector<Matrix<T>*> tensors();
  std::vector<const Matrix<T>*> tensors() const;

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    auto src = tensors();
    auto dst = out.tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = src[i]->template cast<U>();
    return out;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  template <typename Self, typename F>
  static void visit_all(Self& self, F& f) {
    for (int r = 0; r < kNumRelations; ++r) f("layer1." + std::string(to_string(relation_from_code(r))), self.layer1[r]);
    for (int r = 0; r < kNumRelations; ++r) f("layer2." + std::string(to_string(relation_from_code(r))), self.layer2[r]);
    f(std::string("head.tweet_stance"), self.tweet_stance);
    f(std::string("head.sentiment"), self.sentiment);
    f(std::string("head.role"), self.role);
    f(std::string("head.mapping"), self.mapping);
    f(std::string("head.entity_stance"), self.entity_stance);
    f(std::string("prior.sentiment"), self.prior_sentiment);
    f(std::string("prior.role"), self.prior_role);
  }
};

/// Graph-dependent constants of a forward pass: per-relation mean-aggregated input
/// features (rows follow graph.incoming(r).dst_nodes) and the mention input rows
/// fed to the prior classifiers. Rebuild after retyping mention edges.
template <typename T>
struct ModelInputs {
  const HeteroGraph* graph = nullptr;
  std::array<Matrix<T>, kNumRelations> aggregated;
  Matrix<T> mention_features;
};

template <typename T>
ModelInputs<T> prepare_inputs(const HeteroGraph& graph, const Matrix<float>& features, double input_scale = 1.0);

/// Probability tables; every row sums to 1.
template <typename T>
struct Predictions {
  Matrix<T> tweet_stance;      // tweets x 2
  Matrix<T> sentiment;         // mentions x 2
  Matrix<T> role;              // mentions x 2
  Matrix<T> mapping;           // mentions x 11
  Matrix<T> entity_stance;     // mentions x 2
  Matrix<T> prior_sentiment;   // mentions x 2
  Matrix<T> prior_role;        // mentions x 2
};

/// Two R-GCN layers: h' = ReLU(sum_r sum_{j in N_r(i)} h_j W_r / max(1, |N_r(i)|)).
/// Returns the layer-2 embeddings, one row per node.
template <typename T>
Matrix<T> rgcn_forward(const ModelParams<T>& p, const ModelInputs<T>& in);

template <typename T>
Predictions<T> heads_forward(const Matrix<T>& embeddings, const ModelParams<T>& p, const ModelInputs<T>& in);

template <typename T>
Predictions<T> predict(const ModelParams<T>& p, const ModelInputs<T>& in) {
  return heads_forward(rgcn_forward(p, in), p, in);
}

/// Supervision targets, already aligned with tweet and mention ordinals. Rows
/// with mask 0 do not contribute to the corresponding cross-entropy term.
struct Targets {
  std::vector<int> tweet_stance;
  std::vector<std::uint8_t> tweet_mask;
  std::vector<int> sentiment;
  std::vector<int> role;
  std::vector<int> mapping;
  std::vector<std::uint8_t> mention_mask;
  std::vector<int> entity_stance;  // stance of the containing tweet
  std::vector<std::uint8_t> entity_stance_mask;

  static Targets empty(std::size_t tweets, std::size_t mentions);
};

struct LossTerms {
  double tweet_stance = 0;
  double sentiment = 0;
  double role = 0;
  double mapping = 0;
  double entity_stance = 0;
  double sentiment_align = 0;
  double role_align = 0;

  double total() const {
    return tweet_stance + sentiment + role + mapping + entity_stance + sentiment_align + role_align;
  }
};

/// Unit-weighted sum of the five masked cross-entropies and the two L1
/// alignment terms (over all mentions). When `grads` is non-null it receives
/// dL/dparams, including the prior classifiers.
template <typename T>
LossTerms compute_loss(const ModelParams<T>& p, const ModelInputs<T>& in, const Targets& targets,
                       ModelParams<T>* grads = nullptr);

/// One full-batch AdamW step on the combined loss; returns the loss before the update.
LossTerms train_step(ModelParams<float>& p, AdamWState<float>& opt, const ModelInputs<float>& in,
                     const Targets& targets);

}  // namespace perspectra
