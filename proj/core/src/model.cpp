#include "perspectra/model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "perspectra/numkit/kernels.hpp"
#include "perspectra/rng.hpp"
#include "perspectra/types.hpp"

namespace perspectra {
namespace {

template <typename T>
struct EncoderCache {
  Matrix<T> z1, h1, z2, embeddings;
  std::array<Matrix<T>, kNumRelations> aggregated_h1;
};

template <typename T>
struct HeadCache {
  Matrix<T> tweet_in;    // tweets x 2 d_h2: [author ; tweet]
  Matrix<T> mention_in;  // mentions x 2 d_h2: [mention ; tweet]
  Matrix<T> mention_e;   // mentions x d_h2
};

// Mean of `h` over each destination's incoming sources, per relation.
template <typename T, typename Source>
std::array<Matrix<T>, kNumRelations> aggregate(const HeteroGraph& g, const Matrix<Source>& h, T scale) {
  std::array<Matrix<T>, kNumRelations> out;
  const std::size_t d = h.cols();
  for (int r = 0; r < kNumRelations; ++r) {
    const auto& idx = g.incoming(relation_from_code(r));
    Matrix<T> agg(idx.dst_nodes.size(), d);
    for (std::size_t i = 0; i < idx.dst_nodes.size(); ++i) {
      const auto begin = idx.offsets[i];
      const auto end = idx.offsets[i + 1];
      auto row = agg.row(i);
      for (auto k = begin; k < end; ++k) {
        const auto src = h.row(idx.srcs[k]);
        for (std::size_t j = 0; j < d; ++j) row[j] += static_cast<T>(src[j]);
      }
      const T norm = scale / static_cast<T>(end - begin);
      for (auto& v : row) v *= norm;
    }
    out[r] = std::move(agg);
  }
  return out;
}

// z = sum_r scatter(aggregated_r * w_r) over each relation's destination rows.
template <typename T>
void relation_layer(const HeteroGraph& g, const std::array<Matrix<T>, kNumRelations>& aggregated,
                    const std::array<Matrix<T>, kNumRelations>& w, Matrix<T>& z) {
  const std::size_t out_dim = w[0].cols();
  z.resize(g.num_nodes(), out_dim);
  Matrix<T> tmp;
  for (int r = 0; r < kNumRelations; ++r) {
    const auto& dst = g.incoming(relation_from_code(r)).dst_nodes;
    if (dst.empty()) continue;
    tmp.resize(dst.size(), out_dim);
    matmul_into(aggregated[r], w[r], tmp, false);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const auto src = tmp.row(i);
      auto row = z.row(dst[i]);
      for (std::size_t j = 0; j < out_dim; ++j) row[j] += src[j];
    }
  }
}

template <typename T>
Matrix<T> relu(const Matrix<T>& z) {
  Matrix<T> h(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i) h.data()[i] = z.data()[i] > T{0} ? z.data()[i] : T{0};
  return h;
}

template <typename T>
void encode(const ModelParams<T>& p, const ModelInputs<T>& in, EncoderCache<T>& c) {
  const HeteroGraph& g = *in.graph;
  relation_layer(g, in.aggregated, p.layer1, c.z1);
  c.h1 = relu(c.z1);
  c.aggregated_h1 = aggregate<T>(g, c.h1, T{1});
  relation_layer(g, c.aggregated_h1, p.layer2, c.z2);
  c.embeddings = relu(c.z2);
}

template <typename T>
void build_head_inputs(const HeteroGraph& g, const Matrix<T>& e, HeadCache<T>& c) {
  const std::size_t d = e.cols();
  c.tweet_in.resize(g.num_tweets(), 2 * d);
  for (std::size_t t = 0; t < g.num_tweets(); ++t) {
    auto row = c.tweet_in.row(t);
    if (const auto a = g.author_node(g.tweet_author()[t])) {
      const auto src = e.row(*a);
      std::copy(src.begin(), src.end(), row.begin());
    }
    const auto tw = e.row(g.tweet_node(t));
    std::copy(tw.begin(), tw.end(), row.begin() + static_cast<std::ptrdiff_t>(d));
  }
  c.mention_in.resize(g.num_mentions(), 2 * d);
  c.mention_e.resize(g.num_mentions(), d);
  for (std::size_t m = 0; m < g.num_mentions(); ++m) {
    const auto me = e.row(g.mention_node(m));
    const auto tw = e.row(g.tweet_node(g.mention_tweet()[m]));
    auto row = c.mention_in.row(m);
    std::copy(me.begin(), me.end(), row.begin());
    std::copy(tw.begin(), tw.end(), row.begin() + static_cast<std::ptrdiff_t>(d));
    std::copy(me.begin(), me.end(), c.mention_e.row(m).begin());
  }
}

template <typename T>
Predictions<T> run_heads(const HeadCache<T>& c, const ModelParams<T>& p, const ModelInputs<T>& in) {
  Predictions<T> out;
  out.tweet_stance = softmax_rows(matmul(c.tweet_in, p.tweet_stance));
  out.sentiment = softmax_rows(matmul(c.mention_in, p.sentiment));
  out.role = softmax_rows(matmul(c.mention_in, p.role));
  out.mapping = softmax_rows(matmul(c.mention_e, p.mapping));
  out.entity_stance = softmax_rows(matmul(c.mention_in, p.entity_stance));
  out.prior_sentiment = softmax_rows(matmul(in.mention_features, p.prior_sentiment));
  out.prior_role = softmax_rows(matmul(in.mention_features, p.prior_role));
  return out;
}

template <typename T>
Matrix<T> glorot_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix<T> m(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& v : m.flat()) v = static_cast<T>(rng.uniform(-limit, limit));
  return m;
}

template <typename T>
void add_into(Matrix<T>& dst, const Matrix<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

template <typename T>
void check_targets(const Targets& tg, std::size_t tweets, std::size_t mentions) {
  if (tg.tweet_stance.size() != tweets || tg.tweet_mask.size() != tweets || tg.sentiment.size() != mentions ||
      tg.role.size() != mentions || tg.mapping.size() != mentions || tg.mention_mask.size() != mentions ||
      tg.entity_stance.size() != mentions || tg.entity_stance_mask.size() != mentions) {
    throw std::invalid_argument("targets do not match the graph's tweet/mention counts");
  }
}

// Backpropagates dz (rows = all nodes) through one relation layer. Accumulates the
// weight gradients and, when `d_input` is non-null, the gradient w.r.t. the layer input.
template <typename T>
void relation_layer_backward(const HeteroGraph& g, const std::array<Matrix<T>, kNumRelations>& aggregated,
                             const std::array<Matrix<T>, kNumRelations>& w, const Matrix<T>& dz,
                             std::array<Matrix<T>, kNumRelations>& dw, Matrix<T>* d_input) {
  const std::size_t out_dim = dz.cols();
  Matrix<T> gathered, d_agg;
  for (int r = 0; r < kNumRelations; ++r) {
    const auto& idx = g.incoming(relation_from_code(r));
    if (idx.dst_nodes.empty()) continue;
    gathered.resize(idx.dst_nodes.size(), out_dim);
    for (std::size_t i = 0; i < idx.dst_nodes.size(); ++i) {
      const auto src = dz.row(idx.dst_nodes[i]);
      std::copy(src.begin(), src.end(), gathered.row(i).begin());
    }
    matmul_tn_into(aggregated[r], gathered, dw[r], true);
    if (d_input == nullptr) continue;
    d_agg.resize(idx.dst_nodes.size(), w[r].rows());
    matmul_nt_into(gathered, w[r], d_agg, false);
    for (std::size_t i = 0; i < idx.dst_nodes.size(); ++i) {
      const auto begin = idx.offsets[i];
      const auto end = idx.offsets[i + 1];
      const T norm = T{1} / static_cast<T>(end - begin);
      const auto grad = d_agg.row(i);
      for (auto k = begin; k < end; ++k) {
        auto row = d_input->row(idx.srcs[k]);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += grad[j] * norm;
      }
    }
  }
}

template <typename T>
void relu_backward(const Matrix<T>& z, Matrix<T>& grad) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z.data()[i] > T{0})) grad.data()[i] = T{0};
  }
}

}  // namespace

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const ModelConfig& cfg) {
  ModelParams<T> p;
  for (int r = 0; r < kNumRelations; ++r) {
    p.layer1[r] = Matrix<T>(cfg.d_in, cfg.d_h1);
    p.layer2[r] = Matrix<T>(cfg.d_h1, cfg.d_h2);
  }
  p.tweet_stance = Matrix<T>(2 * cfg.d_h2, kNumStances);
  p.sentiment = Matrix<T>(2 * cfg.d_h2, kNumSentiments);
  p.role = Matrix<T>(2 * cfg.d_h2, kNumRoles);
  p.mapping = Matrix<T>(cfg.d_h2, kNumEntities);
  p.entity_stance = Matrix<T>(2 * cfg.d_h2, kNumStances);
  p.prior_sentiment = Matrix<T>(cfg.d_in, kNumSentiments);
  p.prior_role = Matrix<T>(cfg.d_in, kNumRoles);
  return p;
}

template <typename T>
ModelParams<T> ModelParams<T>::glorot(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams<T> p = zeros(cfg);
  std::uint64_t stream = 0;
  p.visit([&](const std::string&, Matrix<T>& m) {
    Rng rng(derive_seed(seed, 0x6C07ULL + stream++));
    m = glorot_matrix<T>(m.rows(), m.cols(), rng);
  });
  return p;
}

template <typename T>
std::vector<Matrix<T>*> ModelParams<T>::tensors() {
  std::vector<Matrix<T>*> out;
  visit([&](const std::string&, Matrix<T>& m) { out.push_back(&m); });
  return out;
}

template <typename T>
std::vector<const Matrix<T>*> ModelParams<T>::tensors() const {
  std::vector<const Matrix<T>*> out;
  visit([&](const std::string&, const Matrix<T>& m) { out.push_back(&m); });
  return out;
}

template <typename T>
ModelInputs<T> prepare_inputs(const HeteroGraph& graph, const Matrix<float>& features, double input_scale) {
  if (features.rows() != graph.num_nodes()) {
    throw std::invalid_argument("feature rows " + std::to_string(features.rows()) + " != graph nodes " +
                                std::to_string(graph.num_nodes()));
  }
  ModelInputs<T> in;
  in.graph = &graph;
  in.aggregated = aggregate<T>(graph, features, static_cast<T>(input_scale));
  in.mention_features = Matrix<T>(graph.num_mentions(), features.cols());
  for (std::size_t m = 0; m < graph.num_mentions(); ++m) {
    const auto src = features.row(graph.mention_node(m));
    auto row = in.mention_features.row(m);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = static_cast<T>(src[j]) * static_cast<T>(input_scale);
  }
  return in;
}

template <typename T>
Matrix<T> rgcn_forward(const ModelParams<T>& p, const ModelInputs<T>& in) {
  EncoderCache<T> c;
  encode(p, in, c);
  return std::move(c.embeddings);
}

template <typename T>
Predictions<T> heads_forward(const Matrix<T>& embeddings, const ModelParams<T>& p, const ModelInputs<T>& in) {
  HeadCache<T> c;
  build_head_inputs(*in.graph, embeddings, c);
  return run_heads(c, p, in);
}

Targets Targets::empty(std::size_t tweets, std::size_t mentions) {
  Targets t;
  t.tweet_stance.assign(tweets, 0);
  t.tweet_mask.assign(tweets, 0);
  t.sentiment.assign(mentions, 0);
  t.role.assign(mentions, 0);
  t.mapping.assign(mentions, 0);
  t.mention_mask.assign(mentions, 0);
  t.entity_stance.assign(mentions, 0);
  t.entity_stance_mask.assign(mentions, 0);
  return t;
}

template <typename T>
LossTerms compute_loss(const ModelParams<T>& p, const ModelInputs<T>& in, const Targets& tg, ModelParams<T>* grads) {
  const HeteroGraph& g = *in.graph;
  check_targets<T>(tg, g.num_tweets(), g.num_mentions());

  EncoderCache<T> enc;
  encode(p, in, enc);
  HeadCache<T> hc;
  build_head_inputs(g, enc.embeddings, hc);

  const auto tweet_logits = matmul(hc.tweet_in, p.tweet_stance);
  const auto sent_logits = matmul(hc.mention_in, p.sentiment);
  const auto role_logits = matmul(hc.mention_in, p.role);
  const auto map_logits = matmul(hc.mention_e, p.mapping);
  const auto es_logits = matmul(hc.mention_in, p.entity_stance);
  const auto prior_sent = softmax_rows(matmul(in.mention_features, p.prior_sentiment));
  const auto prior_role = softmax_rows(matmul(in.mention_features, p.prior_role));
  const auto sent_probs = softmax_rows(sent_logits);
  const auto role_probs = softmax_rows(role_logits);

  const auto ce_tweet = softmax_ce(tweet_logits, std::span<const int>(tg.tweet_stance), tg.tweet_mask);
  const auto ce_sent = softmax_ce(sent_logits, std::span<const int>(tg.sentiment), tg.mention_mask);
  const auto ce_role = softmax_ce(role_logits, std::span<const int>(tg.role), tg.mention_mask);
  const auto ce_map = softmax_ce(map_logits, std::span<const int>(tg.mapping), tg.mention_mask);
  const auto ce_es = softmax_ce(es_logits, std::span<const int>(tg.entity_stance), tg.entity_stance_mask);
  const auto align_sent = l1_loss(sent_probs, prior_sent);
  const auto align_role = l1_loss(role_probs, prior_role);

  LossTerms terms;
  terms.tweet_stance = static_cast<double>(ce_tweet.loss);
  terms.sentiment = static_cast<double>(ce_sent.loss);
  terms.role = static_cast<double>(ce_role.loss);
  terms.mapping = static_cast<double>(ce_map.loss);
  terms.entity_stance = static_cast<double>(ce_es.loss);
  terms.sentiment_align = static_cast<double>(align_sent.loss);
  terms.role_align = static_cast<double>(align_role.loss);
  if (grads == nullptr) return terms;

  ModelParams<T>& d = *grads;
  d = ModelParams<T>::zeros(ModelConfig{p.prior_sentiment.rows(), p.layer1[0].cols(), p.layer2[0].cols()});

  // Alignment terms pull head and prior probabilities toward each other.
  auto d_sent = ce_sent.grad;
  add_into(d_sent, softmax_backward(sent_probs, align_sent.grad));
  auto d_role = ce_role.grad;
  add_into(d_role, softmax_backward(role_probs, align_role.grad));
  auto neg_sent = align_sent.grad;
  for (auto& v : neg_sent.flat()) v = -v;
  auto neg_role = align_role.grad;
  for (auto& v : neg_role.flat()) v = -v;
  matmul_tn_into(in.mention_features, softmax_backward(prior_sent, neg_sent), d.prior_sentiment, false);
  matmul_tn_into(in.mention_features, softmax_backward(prior_role, neg_role), d.prior_role, false);

  matmul_tn_into(hc.tweet_in, ce_tweet.grad, d.tweet_stance, false);
  matmul_tn_into(hc.mention_in, d_sent, d.sentiment, false);
  matmul_tn_into(hc.mention_in, d_role, d.role, false);
  matmul_tn_into(hc.mention_e, ce_map.grad, d.mapping, false);
  matmul_tn_into(hc.mention_in, ce_es.grad, d.entity_stance, false);

  const std::size_t h2 = enc.embeddings.cols();
  Matrix<T> d_tweet_in(g.num_tweets(), 2 * h2);
  matmul_nt_into(ce_tweet.grad, p.tweet_stance, d_tweet_in, false);
  Matrix<T> d_mention_in(g.num_mentions(), 2 * h2);
  matmul_nt_into(d_sent, p.sentiment, d_mention_in, false);
  matmul_nt_into(d_role, p.role, d_mention_in, true);
  matmul_nt_into(ce_es.grad, p.entity_stance, d_mention_in, true);
  Matrix<T> d_mention_e(g.num_mentions(), h2);
  matmul_nt_into(ce_map.grad, p.mapping, d_mention_e, false);

  Matrix<T> d_e(g.num_nodes(), h2);
  for (std::size_t t = 0; t < g.num_tweets(); ++t) {
    const auto grad = d_tweet_in.row(t);
    if (const auto a = g.author_node(g.tweet_author()[t])) {
      auto row = d_e.row(*a);
      for (std::size_t j = 0; j < h2; ++j) row[j] += grad[j];
    }
    auto row = d_e.row(g.tweet_node(t));
    for (std::size_t j = 0; j < h2; ++j) row[j] += grad[h2 + j];
  }
  for (std::size_t m = 0; m < g.num_mentions(); ++m) {
    const auto grad = d_mention_in.row(m);
    const auto grad_e = d_mention_e.row(m);
    auto me = d_e.row(g.mention_node(m));
    for (std::size_t j = 0; j < h2; ++j) me[j] += grad[j] + grad_e[j];
    auto tw = d_e.row(g.tweet_node(g.mention_tweet()[m]));
    for (std::size_t j = 0; j < h2; ++j) tw[j] += grad[h2 + j];
  }

  relu_backward(enc.z2, d_e);
  Matrix<T> d_h1(g.num_nodes(), enc.h1.cols());
  relation_layer_backward(g, enc.aggregated_h1, p.layer2, d_e, d.layer2, &d_h1);
  relu_backward(enc.z1, d_h1);
  relation_layer_backward(g, in.aggregated, p.layer1, d_h1, d.layer1, static_cast<Matrix<T>*>(nullptr));
  return terms;
}

LossTerms train_step(ModelParams<float>& p, AdamWState<float>& opt, const ModelInputs<float>& in,
                     const Targets& targets) {
  ModelParams<float> grads;
  const LossTerms terms = compute_loss(p, in, targets, &grads);
  adamw_step(p.tensors(), std::as_const(grads).tensors(), opt);
  return terms;
}

#define PERSPECTRA_INSTANTIATE(T)                                                                           \
  template struct ModelParams<T>;                                                                           \
  template ModelInputs<T> prepare_inputs<T>(const HeteroGraph&, const Matrix<float>&, double);              \
  template Matrix<T> rgcn_forward(const ModelParams<T>&, const ModelInputs<T>&);                            \
  template Predictions<T> heads_forward(const Matrix<T>&, const ModelParams<T>&, const ModelInputs<T>&);    \
  template LossTerms compute_loss(const ModelParams<T>&, const ModelInputs<T>&, const Targets&, ModelParams<T>*);

PERSPECTRA_INSTANTIATE(float)
PERSPECTRA_INSTANTIATE(double)

#undef PERSPECTRA_INSTANTIATE

}  // namespace perspectra
