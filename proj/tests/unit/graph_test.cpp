#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "perspectra/error.hpp"
#include "perspectra/graph.hpp"
#include "perspectra/lexicon.hpp"
#include "perspectra/synthgen.hpp"

namespace perspectra {
namespace {

using testing::make_author;
using testing::make_tweet;

std::size_t total_edges(const HeteroGraph& g) {
  std::size_t n = 0;
  for (int r = 0; r < kNumRelations; ++r) n += g.edges(relation_from_code(r)).size();
  return n;
}

TEST(Relation, InversePairsAndNames) {
  for (int r = 0; r < kNumBaseRelations; ++r) {
    const auto base = relation_from_code(r);
    EXPECT_EQ(inverse(inverse(base)), base);
    EXPECT_EQ(to_string(inverse(base)), "inv_" + std::string(to_string(base)));
  }
  EXPECT_EQ(inverse(Relation::SelfLoop), Relation::SelfLoop);
  EXPECT_EQ(mention_relation(frame_index(Sentiment::Negative, Role::Target)), Relation::MentionNegTarget);
  EXPECT_EQ(mention_relation(frame_index(Sentiment::Positive, Role::Target)), Relation::MentionPosTarget);
}

TEST(Graph, MinimalGraph) {
  const auto c = Corpus::from_records({make_author("a1")}, {make_tweet("t1", "a1", {})});
  const auto g = build_graph(c);
  EXPECT_EQ(g.num_nodes(), 2u);
  EXPECT_EQ(g.edges(Relation::AuthorTweets), (std::vector<Edge>{{0, 1}}));
  EXPECT_EQ(g.edges(Relation::InvAuthorTweets), (std::vector<Edge>{{1, 0}}));
  EXPECT_EQ(g.edges(Relation::SelfLoop).size(), 2u);
  EXPECT_EQ(total_edges(g), 4u);
}

TEST(Graph, LexicallyEqualMentionsAreDistinctNodes) {
  const auto c = Corpus::from_records({make_author("a1")},
                                      {make_tweet("t1", "a1", {{"thugs"}}), make_tweet("t2", "a1", {{"thugs"}})});
  const auto g = build_graph(c);
  EXPECT_NE(g.mention_node(0), g.mention_node(1));
  EXPECT_EQ(g.node(g.mention_node(0)).kind, NodeKind::Entity);
  EXPECT_EQ(g.node(g.mention_node(1)).kind, NodeKind::Entity);
}

TEST(Graph, NodeCountMatchesIndependentCount) {
  GenConfig cfg;
  cfg.n_authors = 150;
  const auto c = generate(cfg, Lexicon::defaults());
  // Count from the serialized records rather than the in-memory ordinals.
  std::set<std::string> tags, keywords;
  std::size_t authors = 0, tweets = 0, mentions = 0;
  std::istringstream lines(serialize_corpus(c));
  for (std::string line; std::getline(lines, line);) {
    const auto j = nlohmann::json::parse(line);
    if (j["type"] == "author") {
      ++authors;
      for (const auto& k : j["keywords"]) keywords.insert(k.get<std::string>());
    } else {
      ++tweets;
      mentions += j["entities"].size();
      for (const auto& h : j["hashtags"]) tags.insert(h.get<std::string>());
    }
  }
  const auto g = build_graph(c);
  EXPECT_EQ(g.num_nodes(), authors + tweets + mentions + tags.size() + keywords.size());
}

TEST(Graph, TextOnlyGraphDropsAuthorsAndKeywords) {
  auto author = make_author("a1");
  author.keywords = {"teacher"};
  const auto c = Corpus::from_records({author}, {make_tweet("t1", "a1", {{"police"}}, {"blm"})});
  const auto g = build_graph(c, {}, GraphOptions{.author_network = false});
  EXPECT_FALSE(g.has_author_network());
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_FALSE(g.author_node(0).has_value());
  EXPECT_TRUE(g.edges(Relation::AuthorTweets).empty());
  EXPECT_TRUE(g.edges(Relation::AuthorUsesKeyword).empty());
}

void expect_structural_invariants(const HeteroGraph& g) {
  const auto kind = [&](std::uint32_t n) { return g.node(n).kind; };
  const std::map<Relation, std::pair<NodeKind, NodeKind>> schema{
      {Relation::AuthorTweets, {NodeKind::Author, NodeKind::Tweet}},
      {Relation::AuthorRetweets, {NodeKind::Author, NodeKind::Author}},
      {Relation::AuthorUsesKeyword, {NodeKind::Author, NodeKind::Keyword}},
      {Relation::HashtagUsedIn, {NodeKind::Hashtag, NodeKind::Tweet}},
      {Relation::MentionPosActor, {NodeKind::Entity, NodeKind::Tweet}},
      {Relation::MentionPosTarget, {NodeKind::Entity, NodeKind::Tweet}},
      {Relation::MentionNegActor, {NodeKind::Entity, NodeKind::Tweet}},
      {Relation::MentionNegTarget, {NodeKind::Entity, NodeKind::Tweet}},
  };
  for (const auto& [r, kinds] : schema) {
    const auto& base = g.edges(r);
    const auto& inv = g.edges(inverse(r));
    ASSERT_EQ(base.size(), inv.size()) << to_string(r);
    std::multiset<std::pair<std::uint32_t, std::uint32_t>> forward, backward;
    for (const auto& e : base) {
      EXPECT_EQ(kind(e.src), kinds.first) << to_string(r);
      EXPECT_EQ(kind(e.dst), kinds.second) << to_string(r);
      forward.insert({e.src, e.dst});
    }
    for (const auto& e : inv) backward.insert({e.dst, e.src});
    EXPECT_EQ(forward, backward) << to_string(r);
  }
  std::vector<int> loops(g.num_nodes(), 0);
  for (const auto& e : g.edges(Relation::SelfLoop)) {
    EXPECT_EQ(e.src, e.dst);
    ++loops[e.src];
  }
  EXPECT_TRUE(std::all_of(loops.begin(), loops.end(), [](int n) { return n == 1; }));

  std::size_t mention_edges = 0;
  for (int f = 0; f < 4; ++f) mention_edges += g.edges(mention_relation(f)).size();
  EXPECT_EQ(mention_edges, g.num_mentions());

  for (int r = 0; r < kNumRelations; ++r) {
    const auto rel = relation_from_code(r);
    std::vector<std::uint32_t> degree(g.num_nodes(), 0);
    for (const auto& e : g.edges(rel)) ++degree[e.dst];
    for (std::size_t n = 0; n < g.num_nodes(); ++n) EXPECT_EQ(g.in_degree(n, rel), degree[n]);
    const auto& idx = g.incoming(rel);
    ASSERT_EQ(idx.offsets.size(), idx.dst_nodes.size() + 1);
    EXPECT_EQ(idx.srcs.size(), g.edges(rel).size());
    for (std::size_t i = 0; i < idx.dst_nodes.size(); ++i) {
      EXPECT_EQ(idx.offsets[i + 1] - idx.offsets[i], degree[idx.dst_nodes[i]]);
    }
  }
}

TEST(Graph, StructuralInvariantsOnRandomCorpora) {
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const auto c = testing::random_corpus(rng, {1 + rng.below(5), 1 + rng.below(10), rng.below(12), rng.below(4),
                                                rng.below(3), 0.4});
    std::vector<std::uint8_t> frames(c.num_mentions());
    for (auto& f : frames) f = static_cast<std::uint8_t>(rng.below(4));
    const auto g = build_graph(c, frames);
    expect_structural_invariants(g);
    EXPECT_EQ(g.mention_frames(), frames);
  }
}

TEST(Graph, PriorsTypeMentionEdges) {
  const auto c = Corpus::from_records({make_author("a1")}, {make_tweet("t1", "a1", {{"police"}, {"the mayor"}})});
  const std::vector<std::uint8_t> frames{static_cast<std::uint8_t>(frame_index(Sentiment::Negative, Role::Actor)),
                                         static_cast<std::uint8_t>(frame_index(Sentiment::Positive, Role::Target))};
  const auto g = build_graph(c, frames);
  EXPECT_EQ(g.edges(Relation::MentionNegActor), (std::vector<Edge>{{g.mention_node(0), g.tweet_node(0)}}));
  EXPECT_EQ(g.edges(Relation::MentionPosTarget), (std::vector<Edge>{{g.mention_node(1), g.tweet_node(0)}}));
  EXPECT_TRUE(g.edges(Relation::MentionPosActor).empty());
  const auto untyped = build_graph(c);
  EXPECT_EQ(untyped.edges(Relation::MentionPosActor).size(), 2u);
  EXPECT_THROW(build_graph(c, std::vector<std::uint8_t>{0}), DataError);
}

TEST(Retype, UniformAssignment) {
  Rng rng(2);
  const auto c = testing::random_corpus(rng, {3, 6, 9, 2, 1, 0.3});
  std::vector<std::uint8_t> frames(c.num_mentions());
  for (auto& f : frames) f = static_cast<std::uint8_t>(rng.below(4));
  const auto g = build_graph(c, frames);
  const auto all_pos_actor = retype_mention_edges(g, std::vector<std::uint8_t>(c.num_mentions(), 0));
  EXPECT_EQ(all_pos_actor.edges(Relation::MentionPosActor).size(), c.num_mentions());
  EXPECT_EQ(all_pos_actor.edges(Relation::InvMentionPosActor).size(), c.num_mentions());
  expect_structural_invariants(all_pos_actor);
}

TEST(Retype, SingleSwapMovesTwoEntries) {
  Rng rng(3);
  const auto c = testing::random_corpus(rng, {3, 6, 9, 2, 1, 0.3});
  std::vector<std::uint8_t> frames(c.num_mentions(), static_cast<std::uint8_t>(frame_index(Sentiment::Negative, Role::Actor)));
  const auto g = build_graph(c, frames);
  frames[4] = static_cast<std::uint8_t>(frame_index(Sentiment::Positive, Role::Actor));
  const auto h = retype_mention_edges(g, frames);
  std::size_t moved = 0;
  for (int r = 0; r < kNumRelations; ++r) {
    const auto rel = relation_from_code(r);
    std::multiset<std::pair<std::uint32_t, std::uint32_t>> a, b;
    for (const auto& e : g.edges(rel)) a.insert({e.src, e.dst});
    for (const auto& e : h.edges(rel)) b.insert({e.src, e.dst});
    std::vector<std::pair<std::uint32_t, std::uint32_t>> diff;
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(diff));
    moved += diff.size();
  }
  EXPECT_EQ(moved, 2u);
  EXPECT_EQ(h.nodes(), g.nodes());
}

TEST(Retype, IdenticalAssignmentIsIdempotent) {
  Rng rng(4);
  const auto c = testing::random_corpus(rng, {3, 6, 9, 2, 1, 0.3});
  std::vector<std::uint8_t> frames(c.num_mentions());
  for (auto& f : frames) f = static_cast<std::uint8_t>(rng.below(4));
  const auto g = build_graph(c, frames);
  EXPECT_EQ(retype_mention_edges(g, frames), g);
  EXPECT_THROW(retype_mention_edges(g, std::vector<std::uint8_t>(c.num_mentions() - 1, 0)), DataError);
}

TEST(Graph, DumpListsNodesAndEdges) {
  const auto c = Corpus::from_records({make_author("a1")}, {make_tweet("t1", "a1", {})});
  const auto dump = build_graph(c).dump();
  EXPECT_NE(dump.find("NODE 0 author a1"), std::string::npos);
  EXPECT_NE(dump.find("NODE 1 tweet t1"), std::string::npos);
  EXPECT_NE(dump.find("REL author_tweets 0 1"), std::string::npos);
  EXPECT_NE(dump.find("REL self_loop 1 1"), std::string::npos);
}

}  // namespace
}  // namespace perspectra
