#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "fixtures.hpp"
#include "perspectra/error.hpp"
#include "perspectra/featurize.hpp"
#include "perspectra/graph.hpp"
#include "perspectra/lexicon.hpp"
#include "perspectra/synthgen.hpp"

namespace perspectra {
namespace {

using testing::make_author;
using testing::make_tweet;

double norm(std::span<const float> v) {
  double s = 0;
  for (const float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
  return dot / (norm(a) * norm(b));
}

TEST(Tokenize, KeepsPrefixesAndUtf8) {
  EXPECT_EQ(tokenize("Hello, #BLM @Mayor!  caf\xC3\xA9 x2"),
            (std::vector<std::string>{"hello", "#blm", "@mayor", "caf\xC3\xA9", "x2"}));
  EXPECT_TRUE(tokenize("  ,,, ").empty());
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(HashFeaturize, EmptyTextIsZero) {
  const auto v = hash_featurize("", 64);
  EXPECT_EQ(v.size(), 64u);
  EXPECT_EQ(norm(v), 0.0);
}

TEST(HashFeaturize, RepetitionOnlyScales) {
  EXPECT_EQ(hash_featurize("hello hello", 256), hash_featurize("hello", 256));
  EXPECT_NEAR(norm(hash_featurize("the police are here", 256)), 1.0, 1e-6);
}

TEST(HashFeaturize, SingleTokenFollowsTheHashRule) {
  const auto h = fnv1a64("police");
  const auto idx = static_cast<std::uint32_t>(h) % 32;
  const float sign = static_cast<std::int32_t>(h >> 32) < 0 ? -1.0f : 1.0f;
  const auto v = hash_featurize("police", 32);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i == idx ? sign : 0.0f);
}

TEST(HashFeaturize, RandomLongTextsAreNearlyOrthogonal) {
  Rng rng(17);
  const auto text = [&] {
    std::string s;
    for (int i = 0; i < 1000; ++i) s += "w" + std::to_string(rng.below(1000000)) + " ";
    return s;
  };
  for (int trial = 0; trial < 5; ++trial) {
    EXPECT_LT(std::abs(cosine(hash_featurize(text(), 256), hash_featurize(text(), 256))), 0.5);
  }
}

TEST(HashFeaturizer, DimensionMustBePowerOfTwo) {
  EXPECT_THROW(HashFeaturizer(4), UsageError);
  EXPECT_THROW(HashFeaturizer(100), UsageError);
  EXPECT_EQ(HashFeaturizer(8).dim(), 8u);
}

TEST(NodeFeatures, ProfileAuthorUsesProfileText) {
  const auto c = Corpus::from_records({make_author("a1", {}, "p")}, {make_tweet("t1", "a1", {{"police"}})});
  const auto g = build_graph(c);
  const HashFeaturizer f(64);
  const auto x = build_node_features(c, g, f, 1);
  const auto row = x.values.row(*g.author_node(0));
  EXPECT_EQ(std::vector<float>(row.begin(), row.end()), hash_featurize("p", 64));
  const auto m = x.values.row(g.mention_node(0));
  EXPECT_EQ(std::vector<float>(m.begin(), m.end()), hash_featurize("police", 64));
}

TEST(NodeFeatures, ImaginaryAuthorAveragesAllTweets) {
  auto author = make_author("w1");
  author.imaginary = true;
  auto ta = make_tweet("ta", "w1", {});
  ta.text = "police brutality";
  auto tb = make_tweet("tb", "w1", {});
  tb.text = "stand with the community";
  const auto c = Corpus::from_records({author}, {ta, tb});
  const auto g = build_graph(c);
  const auto x = build_node_features(c, g, HashFeaturizer(64), 1);
  const auto va = hash_featurize(ta.text, 64), vb = hash_featurize(tb.text, 64);
  std::vector<double> mean(64);
  for (std::size_t j = 0; j < 64; ++j) mean[j] = (static_cast<double>(va[j]) + vb[j]) / 2;
  const double n = std::sqrt(std::inner_product(mean.begin(), mean.end(), mean.begin(), 0.0));
  const auto row = x.values.row(*g.author_node(0));
  for (std::size_t j = 0; j < 64; ++j) EXPECT_NEAR(row[j], mean[j] / n, 1e-6);
}

TEST(NodeFeatures, ProfileLessAuthorSamplesFiveTweets) {
  std::vector<Tweet> tweets;
  for (int i = 0; i < 7; ++i) {
    auto t = make_tweet("t" + std::to_string(i), "a1", {});
    t.text = "tweet number " + std::to_string(i);
    tweets.push_back(t);
  }
  const auto c = Corpus::from_records({make_author("a1")}, tweets);
  const auto picked = author_feature_tweets(c, 0, 42);
  ASSERT_EQ(picked.size(), 5u);
  EXPECT_EQ(picked, author_feature_tweets(c, 0, 42));
  const auto g = build_graph(c);
  const auto x = build_node_features(c, g, HashFeaturizer(64), 42);
  std::vector<double> sum(64, 0.0);
  for (const auto t : picked) {
    const auto v = hash_featurize(c.tweets()[t].text, 64);
    for (std::size_t j = 0; j < 64; ++j) sum[j] += v[j];
  }
  const double n = std::sqrt(std::inner_product(sum.begin(), sum.end(), sum.begin(), 0.0));
  const auto row = x.values.row(*g.author_node(0));
  for (std::size_t j = 0; j < 64; ++j) EXPECT_NEAR(row[j], sum[j] / n, 1e-6);
}

TEST(NodeFeatures, AuthorWithoutProfileOrTweetsIsZero) {
  const auto c = Corpus::from_records({make_author("a1"), make_author("a2")}, {make_tweet("t1", "a1", {})});
  const auto g = build_graph(c);
  const auto x = build_node_features(c, g, HashFeaturizer(32), 1);
  EXPECT_EQ(norm(x.values.row(*g.author_node(1))), 0.0);
}

TEST(NodeFeatures, DeterministicAndUnitNorm) {
  GenConfig cfg;
  cfg.n_authors = 40;
  const auto c = generate(cfg, Lexicon::defaults());
  const auto g = build_graph(c);
  const HashFeaturizer f(256);
  const auto a = build_node_features(c, g, f, 5);
  const auto b = build_node_features(c, g, f, 5);
  EXPECT_EQ(a.values, b.values);
  ASSERT_EQ(a.values.rows(), g.num_nodes());
  for (std::size_t i = 0; i < a.values.rows(); ++i) {
    const double n = norm(a.values.row(i));
    if (n != 0.0) EXPECT_NEAR(n, 1.0, 1e-6) << i;
    for (const float v : a.values.row(i)) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(NodeFeatures, ImportOverridesMatchingRows) {
  const auto c = Corpus::from_records({make_author("a1", {}, "p")}, {make_tweet("t1", "a1", {{"police"}}, {"blm"})});
  const auto g = build_graph(c);
  const auto import = EmbeddingImport::parse("dim=8\ntweet:t1\t1,2,3,4,5,6,7,8\nhashtag:blm\t0.5,0,0,0,0,0,0,-0.5\n"
                                             "tweet:unknown\t9,9,9,9,9,9,9,9\n");
  EXPECT_EQ(import.dim, 8u);
  const auto x = build_node_features(c, g, HashFeaturizer(8), 1, &import);
  const auto t = x.values.row(g.tweet_node(0));
  EXPECT_EQ(std::vector<float>(t.begin(), t.end()), (std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8}));
  const auto h = x.values.row(g.num_nodes() - 1);
  EXPECT_EQ(h[0], 0.5f);
  EXPECT_EQ(h[7], -0.5f);

  testing::TempDir dir("embed");
  {
    std::ofstream out(dir / "e.tsv");
    out << "dim=8\ntweet:t1\t1,2,3,4,5,6,7,8\n";
  }
  EXPECT_EQ(EmbeddingImport::load(dir / "e.tsv").rows.size(), 1u);
  const auto wrong = EmbeddingImport::parse("dim=4\ntweet:t1\t1,2,3,4\n");
  EXPECT_THROW(build_node_features(c, g, HashFeaturizer(8), 1, &wrong), DataError);
  EXPECT_THROW(EmbeddingImport::parse("dim=4\ntweet:t1\t1,2,3\n"), DataError);
}

}  // namespace
}  // namespace perspectra
