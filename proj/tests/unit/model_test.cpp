#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "oracle_checks.hpp"
#include "perspectra/checkpoint.hpp"
#include "perspectra/error.hpp"
#include "perspectra/experiment.hpp"
#include "perspectra/featurize.hpp"
#include "perspectra/graph.hpp"
#include "perspectra/model.hpp"
#include "perspectra/priors.hpp"

namespace perspectra {
namespace {

using testing::make_author;
using testing::make_tweet;

Matrix<double> identity(std::size_t n) {
  Matrix<double> m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void expect_rows_sum_to_one(const Matrix<double>& p) {
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0;
    for (const double v : p.row(i)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Rgcn, SelfLoopIdentityPropagatesInput) {
  const auto c = Corpus::from_records({make_author("a1")}, {});
  const auto g = build_graph(c);
  ASSERT_EQ(g.num_nodes(), 1u);
  auto p = ModelParams<double>::zeros({4, 4, 4});
  p.layer1[code(Relation::SelfLoop)] = identity(4);
  p.layer2[code(Relation::SelfLoop)] = identity(4);
  const Matrix<float> x(1, 4, {0.5f, 0.0f, 0.25f, 1.0f});
  const auto e = rgcn_forward(p, prepare_inputs<double>(g, x));
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(e(0, j), x(0, j));
}

TEST(Rgcn, NeighboursAreMeanAggregated) {
  const auto c = Corpus::from_records({make_author("a1")}, {make_tweet("t1", "a1", {}, {"u", "v"})});
  const auto g = build_graph(c, {}, GraphOptions{.author_network = false});
  ASSERT_EQ(g.num_nodes(), 3u);
  auto p = ModelParams<double>::zeros({2, 2, 2});
  p.layer1[code(Relation::HashtagUsedIn)] = Matrix<double>(2, 2, {1, 2, 3, 4});
  p.layer2[code(Relation::SelfLoop)] = identity(2);
  const Matrix<float> x(3, 2, {9, 9, 1, 2, 3, 0});  // tweet, #u, #v
  const auto e = rgcn_forward(p, prepare_inputs<double>(g, x));
  // ((1,2) + (3,0)) / 2 = (2,1); (2,1) W = (2 + 3, 4 + 4).
  EXPECT_DOUBLE_EQ(e(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(e(0, 1), 8.0);
}

TEST(Rgcn, HandComputedThreeNodeGraph) {
  // author a -> tweet t <- hashtag h, scalar features and weights.
  const auto c = Corpus::from_records({make_author("a")}, {make_tweet("t", "a", {}, {"h"})});
  const auto g = build_graph(c);
  ASSERT_EQ(g.num_nodes(), 3u);
  auto p = ModelParams<double>::zeros({1, 1, 1});
  const auto set = [](std::array<Matrix<double>, kNumRelations>& layer, Relation r, double w) {
    layer[code(r)] = Matrix<double>(1, 1, w);
  };
  set(p.layer1, Relation::AuthorTweets, 0.5);
  set(p.layer1, Relation::InvAuthorTweets, -1.0);
  set(p.layer1, Relation::HashtagUsedIn, 2.0);
  set(p.layer1, Relation::InvHashtagUsedIn, 0.25);
  set(p.layer1, Relation::SelfLoop, 1.0);
  set(p.layer2, Relation::AuthorTweets, 1.0);
  set(p.layer2, Relation::InvAuthorTweets, 0.5);
  set(p.layer2, Relation::HashtagUsedIn, -0.5);
  set(p.layer2, Relation::InvHashtagUsedIn, 1.0);
  set(p.layer2, Relation::SelfLoop, 2.0);
  const Matrix<float> x(3, 1, {0.4f, 0.2f, 0.8f});  // a, t, h
  // Layer 1: t = 0.4*0.5 + 0.8*2 + 0.2 = 2.0; a = 0.2*-1 + 0.4 = 0.2; h = 0.2*0.25 + 0.8 = 0.85.
  // Layer 2: t = 0.2*1 + 0.85*-0.5 + 2*2 = 3.775; a = 2*0.5 + 0.2*2 = 1.4; h = 2*1 + 0.85*2 = 3.7.
  const auto e = rgcn_forward(p, prepare_inputs<double>(g, x));
  EXPECT_NEAR(e(0, 0), 1.4, 1e-7);
  EXPECT_NEAR(e(1, 0), 3.775, 1e-7);
  EXPECT_NEAR(e(2, 0), 3.7, 1e-7);
}

TEST(Rgcn, ReluClipsNegativePreActivations) {
  const auto c = Corpus::from_records({make_author("a1")}, {});
  const auto g = build_graph(c);
  auto p = ModelParams<double>::zeros({2, 2, 2});
  p.layer1[code(Relation::SelfLoop)] = identity(2);
  p.layer2[code(Relation::SelfLoop)] = identity(2);
  const auto e = rgcn_forward(p, prepare_inputs<double>(g, Matrix<float>(1, 2, {-1.0f, 3.0f})));
  EXPECT_EQ(e(0, 0), 0.0);
  EXPECT_EQ(e(0, 1), 3.0);
}

struct Fixture {
  Corpus corpus;
  HeteroGraph graph;
  Matrix<float> features;
};

Fixture random_fixture(std::uint64_t seed, std::size_t d) {
  Rng rng(seed);
  Fixture f;
  f.corpus = testing::random_corpus(rng, {4, 8, 10, 3, 2, 0.4});
  f.graph = build_graph(f.corpus);
  f.features = testing::random_features(rng, f.graph.num_nodes(), d);
  return f;
}

TEST(Heads, ZeroWeightsGiveUniformProbabilities) {
  const auto f = random_fixture(1, 8);
  const auto p = ModelParams<double>::zeros({8, 6, 4});
  const auto pred = predict(p, prepare_inputs<double>(f.graph, f.features));
  for (const auto* m : {&pred.tweet_stance, &pred.sentiment, &pred.role, &pred.entity_stance, &pred.prior_sentiment,
                        &pred.prior_role}) {
    for (const double v : m->flat()) EXPECT_DOUBLE_EQ(v, 0.5);
  }
  ASSERT_EQ(pred.mapping.cols(), 11u);
  for (const double v : pred.mapping.flat()) EXPECT_NEAR(v, 1.0 / 11, 1e-15);
}

TEST(Heads, EveryRowIsADistribution) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = random_fixture(seed, 16);
    auto p = ModelParams<double>::glorot({16, 12, 8}, seed);
    for (auto* m : p.tensors()) {
      for (auto& v : m->flat()) v *= 3.0;
    }
    const auto pred = predict(p, prepare_inputs<double>(f.graph, f.features));
    EXPECT_EQ(pred.tweet_stance.rows(), f.graph.num_tweets());
    EXPECT_EQ(pred.sentiment.rows(), f.graph.num_mentions());
    for (const auto* m : {&pred.tweet_stance, &pred.sentiment, &pred.role, &pred.mapping, &pred.entity_stance,
                          &pred.prior_sentiment, &pred.prior_role}) {
      expect_rows_sum_to_one(*m);
    }
  }
}

TEST(Heads, MappingDependsOnlyOnTheMentionEmbedding) {
  const auto f = random_fixture(3, 16);
  const auto in = prepare_inputs<double>(f.graph, f.features);
  const auto p = ModelParams<double>::glorot({16, 12, 8}, 3);
  const auto e = rgcn_forward(p, in);
  const auto base = heads_forward(e, p, in);

  auto other_heads = p;
  for (auto* m : {&other_heads.tweet_stance, &other_heads.sentiment, &other_heads.role, &other_heads.entity_stance,
                  &other_heads.prior_sentiment, &other_heads.prior_role}) {
    for (auto& v : m->flat()) v += 0.7;
  }
  EXPECT_EQ(heads_forward(e, other_heads, in).mapping, base.mapping);

  auto e2 = e;
  for (std::size_t n = 0; n < f.graph.num_nodes(); ++n) {
    if (f.graph.node(n).kind == NodeKind::Entity) continue;
    for (auto& v : e2.row(n)) v += 1.5;
  }
  const auto perturbed = heads_forward(e2, p, in);
  EXPECT_EQ(perturbed.mapping, base.mapping);
  EXPECT_NE(perturbed.sentiment, base.sentiment);
}

TEST(Loss, VanishesWithoutLabelsWhenPriorsAgree) {
  const auto f = random_fixture(4, 8);
  const auto in = prepare_inputs<double>(f.graph, f.features);
  const auto p = ModelParams<double>::zeros({8, 6, 4});
  const auto t = Targets::empty(f.graph.num_tweets(), f.graph.num_mentions());
  EXPECT_EQ(compute_loss(p, in, t).total(), 0.0);
}

TEST(Loss, OneLabeledTweetUnderUniformPredictions) {
  const auto f = random_fixture(5, 8);
  const auto in = prepare_inputs<double>(f.graph, f.features);
  const auto p = ModelParams<double>::zeros({8, 6, 4});
  auto t = Targets::empty(f.graph.num_tweets(), f.graph.num_mentions());
  t.tweet_stance[2] = 1;
  t.tweet_mask[2] = 1;
  const auto terms = compute_loss(p, in, t);
  EXPECT_NEAR(terms.tweet_stance, std::log(2.0), 1e-12);
  EXPECT_NEAR(terms.total(), std::log(2.0), 1e-12);
}

TEST(Loss, PriorsReceiveGradientFromAlignmentAlone) {
  const auto f = random_fixture(6, 8);
  const auto in = prepare_inputs<double>(f.graph, f.features);
  const auto p = ModelParams<double>::glorot({8, 6, 4}, 6);
  const auto t = Targets::empty(f.graph.num_tweets(), f.graph.num_mentions());
  ModelParams<double> g;
  const auto terms = compute_loss(p, in, t, &g);
  EXPECT_GT(terms.sentiment_align + terms.role_align, 0.0);
  const auto nonzero = [](const Matrix<double>& m) {
    return std::any_of(m.flat().begin(), m.flat().end(), [](double v) { return v != 0.0; });
  };
  EXPECT_TRUE(nonzero(g.prior_sentiment));
  EXPECT_TRUE(nonzero(g.prior_role));
}

TEST(Loss, LabelOutOfRangeThrows) {
  const auto f = random_fixture(7, 8);
  const auto in = prepare_inputs<double>(f.graph, f.features);
  const auto p = ModelParams<double>::zeros({8, 6, 4});
  auto t = Targets::empty(f.graph.num_tweets(), f.graph.num_mentions());
  t.mapping[0] = 11;
  t.mention_mask[0] = 1;
  EXPECT_ANY_THROW(compute_loss(p, in, t));
}

TEST(Loss, GradientMatchesFiniteDifferencesOnTwelveNodeGraphs) {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const auto r = testing::full_loss_grad_check(seed);
    EXPECT_EQ(r.nodes, 12u);
    EXPECT_LE(r.max_rel_error, 1e-4) << "seed " << seed;
  }
}

// Rebuilds a corpus with authors and tweets in reverse order; profiles keep the
// author features independent of tweet ordinals.
Corpus reversed(const Corpus& c) {
  std::vector<Author> authors(c.authors().rbegin(), c.authors().rend());
  std::vector<Tweet> tweets(c.tweets().rbegin(), c.tweets().rend());
  return Corpus::from_records(authors, tweets);
}

TEST(Model, PermutingNodeOrdinalsLeavesPredictionsUnchanged) {
  Rng rng(8);
  auto shape = testing::RandomShape{5, 10, 12, 4, 3, 0.4};
  auto base = testing::random_corpus(rng, shape);
  std::vector<Author> authors = base.authors();
  for (auto& a : authors) a.profile = "profile of " + a.id;
  const auto c1 = Corpus::from_records(authors, base.tweets());
  const auto c2 = reversed(c1);
  const HashFeaturizer fz(32);
  const ModelConfig cfg{32, 16, 8};
  const auto p = ModelParams<double>::glorot(cfg, 8);

  const auto run = [&](const Corpus& c) {
    const auto g = build_graph(c);
    const auto x = build_node_features(c, g, fz, 1);
    const auto in = prepare_inputs<double>(g, x.values);
    auto t = Targets::empty(g.num_tweets(), g.num_mentions());
    for (std::size_t i = 0; i < c.tweets().size(); ++i) {
      const auto n = std::stoi(c.tweets()[i].id.substr(1));
      t.tweet_stance[i] = n % 2;
      t.tweet_mask[i] = n % 3 != 0;
    }
    for (std::size_t m = 0; m < c.num_mentions(); ++m) {
      const auto h = fnv1a64(c.mention(m).id);
      t.sentiment[m] = static_cast<int>(h % 2);
      t.role[m] = static_cast<int>((h >> 1) % 2);
      t.mapping[m] = static_cast<int>((h >> 2) % 11);
      t.mention_mask[m] = (h >> 8) % 2;
      t.entity_stance[m] = t.tweet_stance[c.mention_tweet(m)];
      t.entity_stance_mask[m] = t.tweet_mask[c.mention_tweet(m)];
    }
    return std::pair{compute_loss(p, in, t), predict(p, in)};
  };
  const auto [l1, p1] = run(c1);
  const auto [l2, p2] = run(c2);
  EXPECT_NEAR(l1.total(), l2.total(), 1e-5);
  EXPECT_NEAR(l1.sentiment_align, l2.sentiment_align, 1e-5);
  for (std::size_t t = 0; t < c1.tweets().size(); ++t) {
    const auto t2 = *c2.tweet_index(c1.tweets()[t].id);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(p1.tweet_stance(t, j), p2.tweet_stance(t2, j), 1e-5);
    for (std::size_t k = 0; k < c1.tweets()[t].entities.size(); ++k) {
      const auto m1 = c1.first_mention(t) + k, m2 = c2.first_mention(t2) + k;
      for (std::size_t j = 0; j < 11; ++j) EXPECT_NEAR(p1.mapping(m1, j), p2.mapping(m2, j), 1e-5);
      for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(p1.role(m1, j), p2.role(m2, j), 1e-5);
    }
  }
}

TEST(Model, GlorotIsSeededPerTensor) {
  const ModelConfig cfg{16, 8, 4};
  const auto a = ModelParams<float>::glorot(cfg, 1);
  EXPECT_EQ(a, ModelParams<float>::glorot(cfg, 1));
  EXPECT_NE(a, ModelParams<float>::glorot(cfg, 2));
  EXPECT_EQ(a.tensors().size(), 2u * kNumRelations + 7);
  EXPECT_EQ(a.tweet_stance.rows(), 8u);
  EXPECT_EQ(a.mapping.rows(), 4u);
  EXPECT_EQ(a.mapping.cols(), 11u);
  EXPECT_EQ(a.prior_role.rows(), 16u);
  const double limit = std::sqrt(6.0 / (16 + 8));
  for (const float v : a.layer1[0].flat()) EXPECT_LE(std::abs(v), limit);
}

TEST(Model, TrainStepLowersTheLoss) {
  const auto f = random_fixture(9, 16);
  const ModelConfig cfg{16, 12, 8};
  auto p = ModelParams<float>::glorot(cfg, 9);
  const auto in = prepare_inputs<float>(f.graph, f.features);
  auto t = Targets::empty(f.graph.num_tweets(), f.graph.num_mentions());
  std::fill(t.tweet_mask.begin(), t.tweet_mask.end(), 1);
  AdamWState<float> opt;
  opt.config.lr = 0.01;
  const double first = train_step(p, opt, in, t).total();
  double last = first;
  for (int i = 0; i < 30; ++i) last = train_step(p, opt, in, t).total();
  EXPECT_LT(last, first);
}

TEST(Priors, SeparableToySetIsLearnedPerfectly) {
  Rng rng(10);
  Matrix<float> x(200, 4);
  std::vector<int> s(200), r(200);
  for (std::size_t i = 0; i < 200; ++i) {
    s[i] = static_cast<int>(rng.below(2));
    r[i] = static_cast<int>(rng.below(2));
    x(i, 0) = s[i] ? 1.0f : -1.0f;
    x(i, 1) = r[i] ? 1.0f : -1.0f;
    x(i, 2) = static_cast<float>(rng.uniform(-0.1, 0.1));
    x(i, 3) = 1.0f;
  }
  PriorTrainConfig cfg;
  cfg.lr = 0.05;
  const auto fit = pretrain_priors(x, s, r, cfg);
  EXPECT_EQ(fit.sentiment_accuracy, 1.0);
  EXPECT_EQ(fit.role_accuracy, 1.0);
  EXPECT_LE(fit.epochs, fit.best_epoch + cfg.patience);
  EXPECT_EQ(prior_accuracy(fit.weights.sentiment, x, s), 1.0);
}

TEST(Priors, PatienceBoundsTheRun) {
  Rng rng(11);
  Matrix<float> x(100, 4);
  std::vector<int> s(100), r(100);
  for (std::size_t i = 0; i < 100; ++i) {
    for (auto& v : x.row(i)) v = static_cast<float>(rng.uniform(-1, 1));
    s[i] = static_cast<int>(rng.below(2));
    r[i] = static_cast<int>(rng.below(2));
  }
  const auto fit = pretrain_priors(x, s, r, PriorTrainConfig{});
  EXPECT_LE(fit.epochs - fit.best_epoch, 3u);
  EXPECT_THROW(pretrain_priors(Matrix<float>(0, 4), {}, {}, PriorTrainConfig{}), DataError);
}

TEST(Priors, PlantedCueCorpusIsSeparable) {
  const ExperimentConfig cfg;
  const auto corpus = prior_corpus(cfg.gen, cfg.prior_authors, Lexicon::defaults(), PerspectiveTable::defaults());
  const HashFeaturizer f(cfg.model.d_in);
  const auto fit = fit_priors(corpus, f, cfg.model.input_scale, cfg.prior);
  EXPECT_GT(fit.sentiment_accuracy, 0.9);
  EXPECT_GT(fit.role_accuracy, 0.9);
  const auto frames = prior_frames(fit.weights, mention_features(corpus, f, cfg.model.input_scale));
  EXPECT_EQ(frames.size(), corpus.num_mentions());
}

TEST(Checkpoint, RoundTripIsBitwise) {
  Checkpoint ck;
  ck.set("model.d_in", "16");
  ck.set("note", "a = b");
  put_params(ck, ModelParams<float>::glorot({16, 8, 4}, 3));
  ck.put("extra", Matrix<float>(2, 3, {1, -2, 3.5f, 0, 1e-30f, -0.0f}));
  const auto bytes = ck.encode();
  const auto back = Checkpoint::decode(bytes);
  EXPECT_EQ(back, ck);
  EXPECT_EQ(back.encode(), bytes);
  EXPECT_EQ(get_params(back, {16, 8, 4}), ModelParams<float>::glorot({16, 8, 4}, 3));
  EXPECT_EQ(back.require("note"), "a = b");
  EXPECT_THROW(back.require("missing"), DataError);
  EXPECT_THROW(back.tensor("missing"), DataError);

  testing::TempDir dir("ckpt");
  save_checkpoint(ck, dir / "c.bin");
  EXPECT_EQ(load_checkpoint(dir / "c.bin"), ck);
}

TEST(Checkpoint, CorruptionIsDetected) {
  Checkpoint ck;
  ck.set("k", "v");
  ck.put("w", Matrix<float>(4, 4, 1.0f));
  auto bytes = ck.encode();
  auto bad = bytes;
  bad[0] = 'X';
  try {
    Checkpoint::decode(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
  auto version = bytes;
  version[4] = 9;
  EXPECT_THROW(Checkpoint::decode(version), DataError);
  EXPECT_THROW(Checkpoint::decode(std::string_view(bytes).substr(0, bytes.size() - 5)), DataError);
  EXPECT_THROW(Checkpoint::decode(""), DataError);
}

TEST(Checkpoint, ModelConfigRoundTrip) {
  ModelConfig cfg{64, 20, 10};
  cfg.input_scale = 2.5;
  cfg.seed = 77;
  cfg.author_network = false;
  Checkpoint ck;
  put_model_config(ck, cfg);
  const auto back = get_model_config(ck);
  EXPECT_EQ(back.d_in, 64u);
  EXPECT_EQ(back.d_h1, 20u);
  EXPECT_EQ(back.d_h2, 10u);
  EXPECT_EQ(back.input_scale, 2.5);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_FALSE(back.author_network);
}

}  // namespace
}  // namespace perspectra
