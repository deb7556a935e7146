#include "perspectra/graph.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "perspectra/error.hpp"

namespace perspectra {
namespace {

constexpr std::array<std::string_view, kNumRelations> kRelationNames{
    "author_tweets",          "author_retweets",          "author_uses_keyword",     "hashtag_used_in",
    "mention_pos_actor",      "mention_pos_target",       "mention_neg_actor",       "mention_neg_target",
    "inv_author_tweets",      "inv_author_retweets",      "inv_author_uses_keyword", "inv_hashtag_used_in",
    "inv_mention_pos_actor",  "inv_mention_pos_target",   "inv_mention_neg_actor",   "inv_mention_neg_target",
    "self_loop",
};

// Interns strings into a dense block of node ordinals, in first-occurrence order.
class Interner {
 public:
  std::uint32_t get(const std::string& key, std::uint32_t next_ordinal, bool& inserted) {
    auto [it, fresh] = index_.try_emplace(key, next_ordinal);
    inserted = fresh;
    return it->second;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
};

}  // namespace

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Author: return "author";
    case NodeKind::Tweet: return "tweet";
    case NodeKind::Entity: return "entity";
    case NodeKind::Hashtag: return "hashtag";
    case NodeKind::Keyword: return "keyword";
  }
  return "?";
}

std::string_view to_string(Relation r) { return kRelationNames.at(static_cast<std::size_t>(code(r))); }

std::optional<std::uint32_t> HeteroGraph::author_node(std::size_t a) const {
  if (author_network_dropped_) return std::nullopt;
  return static_cast<std::uint32_t>(a);
}

HeteroGraph build_graph(const Corpus& corpus, std::span<const std::uint8_t> mention_frames, GraphOptions options) {
  if (!mention_frames.empty() && mention_frames.size() != corpus.num_mentions()) {
    throw DataError("mention frame count " + std::to_string(mention_frames.size()) + " does not match " +
                    std::to_string(corpus.num_mentions()) + " mentions");
  }
  HeteroGraph g;
  g.author_network_dropped_ = !options.author_network;
  const auto& authors = corpus.authors();
  const auto& tweets = corpus.tweets();

  if (options.author_network) {
    for (const auto& a : authors) g.nodes_.push_back({NodeKind::Author, a.id});
    g.num_authors_ = authors.size();
  }
  g.tweet_base_ = g.nodes_.size();
  for (const auto& t : tweets) g.nodes_.push_back({NodeKind::Tweet, t.id});
  g.num_tweets_ = tweets.size();
  g.mention_base_ = g.nodes_.size();
  for (std::size_t m = 0; m < corpus.num_mentions(); ++m) g.nodes_.push_back({NodeKind::Entity, corpus.mention(m).id});
  g.num_mentions_ = corpus.num_mentions();

  g.tweet_author_.resize(tweets.size());
  for (std::size_t t = 0; t < tweets.size(); ++t) g.tweet_author_[t] = static_cast<std::uint32_t>(corpus.tweet_author(t));
  g.mention_tweet_.resize(corpus.num_mentions());
  for (std::size_t m = 0; m < corpus.num_mentions(); ++m) {
    g.mention_tweet_[m] = static_cast<std::uint32_t>(corpus.mention_tweet(m));
  }
  g.mention_frames_.assign(corpus.num_mentions(), 0);
  for (std::size_t m = 0; m < mention_frames.size(); ++m) {
    if (mention_frames[m] > 3) throw DataError("mention frame out of range for " + corpus.mention(m).id);
    g.mention_frames_[m] = mention_frames[m];
  }

  auto& edges = g.edges_;
  Interner hashtags;
  for (std::size_t t = 0; t < tweets.size(); ++t) {
    std::vector<std::uint32_t> seen;
    for (const auto& tag : tweets[t].hashtags) {
      bool fresh = false;
      const auto node = hashtags.get(tag, static_cast<std::uint32_t>(g.nodes_.size()), fresh);
      if (fresh) g.nodes_.push_back({NodeKind::Hashtag, tag});
      if (std::find(seen.begin(), seen.end(), node) != seen.end()) continue;
      seen.push_back(node);
      edges[code(Relation::HashtagUsedIn)].push_back({node, g.tweet_node(t)});
    }
  }

  if (options.author_network) {
    for (std::size_t t = 0; t < tweets.size(); ++t) {
      edges[code(Relation::AuthorTweets)].push_back({g.tweet_author_[t], g.tweet_node(t)});
    }
    for (std::size_t a = 0; a < authors.size(); ++a) {
      for (const auto target : corpus.author_retweets(a)) {
        edges[code(Relation::AuthorRetweets)].push_back(
            {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(target)});
      }
    }
    Interner keywords;
    for (std::size_t a = 0; a < authors.size(); ++a) {
      std::vector<std::uint32_t> seen;
      for (const auto& kw : authors[a].keywords) {
        bool fresh = false;
        const auto node = keywords.get(kw, static_cast<std::uint32_t>(g.nodes_.size()), fresh);
        if (fresh) g.nodes_.push_back({NodeKind::Keyword, kw});
        if (std::find(seen.begin(), seen.end(), node) != seen.end()) continue;
        seen.push_back(node);
        edges[code(Relation::AuthorUsesKeyword)].push_back({static_cast<std::uint32_t>(a), node});
      }
    }
  }

  for (const Relation r : {Relation::AuthorTweets, Relation::AuthorRetweets, Relation::AuthorUsesKeyword,
                           Relation::HashtagUsedIn}) {
    auto& inv = edges[code(inverse(r))];
    for (const auto& e : edges[code(r)]) inv.push_back({e.dst, e.src});
  }
  for (std::uint32_t i = 0; i < g.nodes_.size(); ++i) edges[code(Relation::SelfLoop)].push_back({i, i});

  g.set_mention_edges();
  g.finalize();
  return g;
}

HeteroGraph retype_mention_edges(const HeteroGraph& g, std::span<const std::uint8_t> mention_frames) {
  if (mention_frames.size() != g.num_mentions_) {
    const std::size_t missing = std::min(mention_frames.size(), g.num_mentions_);
    const std::string id = missing < g.num_mentions_ ? g.nodes_[g.mention_node(missing)].id : std::string("?");
    throw DataError("missing mention frame assignment for " + id);
  }
  HeteroGraph out = g;
  for (std::size_t m = 0; m < mention_frames.size(); ++m) {
    if (mention_frames[m] > 3) throw DataError("mention frame out of range for " + g.nodes_[g.mention_node(m)].id);
    out.mention_frames_[m] = mention_frames[m];
  }
  out.set_mention_edges();
  out.finalize();
  return out;
}

void HeteroGraph::set_mention_edges() {
  for (int f = 0; f < 4; ++f) {
    edges_[code(mention_relation(f))].clear();
    edges_[code(inverse(mention_relation(f)))].clear();
  }
  for (std::size_t m = 0; m < num_mentions_; ++m) {
    const Relation r = mention_relation(mention_frames_[m]);
    const Edge e{mention_node(m), tweet_node(mention_tweet_[m])};
    edges_[code(r)].push_back(e);
    edges_[code(inverse(r))].push_back({e.dst, e.src});
  }
}

void HeteroGraph::finalize() {
  const std::size_t n = nodes_.size();
  for (int r = 0; r < kNumRelations; ++r) {
    auto& deg = in_degree_[r];
    deg.assign(n, 0);
    for (const auto& e : edges_[r]) ++deg[e.dst];

    // Counting sort by destination keeps each destination's sources in edge order.
    std::vector<std::uint32_t> start(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) start[i + 1] = start[i] + deg[i];
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    std::vector<std::uint32_t> srcs(edges_[r].size());
    for (const auto& e : edges_[r]) srcs[fill[e.dst]++] = e.src;

    RelationIndex idx;
    idx.offsets.push_back(0);
    for (std::uint32_t i = 0; i < n; ++i) {
      if (deg[i] == 0) continue;
      idx.dst_nodes.push_back(i);
      idx.srcs.insert(idx.srcs.end(), srcs.begin() + start[i], srcs.begin() + start[i + 1]);
      idx.offsets.push_back(static_cast<std::uint32_t>(idx.srcs.size()));
    }
    incoming_[r] = std::move(idx);
  }
}

std::string HeteroGraph::dump() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out << "NODE " << i << ' ' << to_string(nodes_[i].kind) << ' ' << nodes_[i].id << '\n';
  }
  for (int r = 0; r < kNumRelations; ++r) {
    for (const auto& e : edges_[r]) out << "REL " << kRelationNames[r] << ' ' << e.src << ' ' << e.dst << '\n';
  }
  return out.str();
}

}  // namespace perspectra
