#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "perspectra/corpus.hpp"
#include "perspectra/types.hpp"

namespace perspectra {

enum class NodeKind : std::uint8_t { Author, Tweet, Entity, Hashtag, Keyword };

/// Base relations, their inverses (base + 8) and the self-loop: 17 slots.
enum class Relation : std::uint8_t {
  AuthorTweets = 0,
  AuthorRetweets,
  AuthorUsesKeyword,
  HashtagUsedIn,
  MentionPosActor,
  MentionPosTarget,
  MentionNegActor,
  MentionNegTarget,
  InvAuthorTweets,
  InvAuthorRetweets,
  InvAuthorUsesKeyword,
  InvHashtagUsedIn,
  InvMentionPosActor,
  InvMentionPosTarget,
  InvMentionNegActor,
  InvMentionNegTarget,
  SelfLoop,
};

inline constexpr int kNumBaseRelations = 8;
inline constexpr int kNumRelations = 2 * kNumBaseRelations + 1;

constexpr int code(Relation r) { return static_cast<int>(r); }
constexpr Relation relation_from_code(int c) { return static_cast<Relation>(c); }
constexpr bool is_base(Relation r) { return code(r) < kNumBaseRelations; }

/// Inverse of a base relation (and vice versa); the self-loop is its own inverse.
constexpr Relation inverse(Relation r) {
  if (r == Relation::SelfLoop) return r;
  return is_base(r) ? relation_from_code(code(r) + kNumBaseRelations) : relation_from_code(code(r) - kNumBaseRelations);
}

/// Entity->tweet relation for a (sentiment, role) frame index (see frame_index()).
constexpr Relation mention_relation(int frame) { return relation_from_code(code(Relation::MentionPosActor) + frame); }

std::string_view to_string(NodeKind k);
std::string_view to_string(Relation r);

struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphOptions {
  /// When false, author and keyword nodes are left out: the graph holds only text
  /// (tweets, mentions, hashtags). Used for the text-as-graph ablation.
  bool author_network = true;
};

/// Incoming neighbours of one relation grouped by destination (CSR).
struct RelationIndex {
  std::vector<std::uint32_t> dst_nodes;  // destinations with at least one incoming edge
  std::vector<std::uint32_t> offsets;    // size dst_nodes.size() + 1
  std::vector<std::uint32_t> srcs;
};

/// Node ordinals: authors, tweets, mentions, hashtags, keywords (each block in
/// first-occurrence order). Mention edges are typed by a (sentiment, role) frame.
class HeteroGraph {
 public:
  struct Node {
    NodeKind kind{};
    std::string id;
    friend bool operator==(const Node&, const Node&) = default;
  };

  std::size_t num_nodes() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }

  bool has_author_network() const { return !author_network_dropped_; }
  std::size_t num_authors() const { return num_authors_; }
  std::size_t num_tweets() const { return num_tweets_; }
  std::size_t num_mentions() const { return num_mentions_; }

  /// Node ordinal of author a; nullopt when the author network is dropped.
  std::optional<std::uint32_t> author_node(std::size_t a) const;
  std::uint32_t tweet_node(std::size_t t) const { return static_cast<std::uint32_t>(tweet_base_ + t); }
  std::uint32_t mention_node(std::size_t m) const { return static_cast<std::uint32_t>(mention_base_ + m); }

  /// Author ordinal of each tweet (corpus ordinals), for head inputs.
  const std::vector<std::uint32_t>& tweet_author() const { return tweet_author_; }
  /// Tweet ordinal of each mention.
  const std::vector<std::uint32_t>& mention_tweet() const { return mention_tweet_; }
  /// Frame index (0..3) currently typing each mention edge.
  const std::vector<std::uint8_t>& mention_frames() const { return mention_frames_; }

  const std::vector<Edge>& edges(Relation r) const { return edges_[code(r)]; }
  const RelationIndex& incoming(Relation r) const { return incoming_[code(r)]; }
  std::uint32_t in_degree(std::size_t node, Relation r) const { return in_degree_[code(r)][node]; }

  /// `NODE <ordinal> <kind> <id>` lines, then `REL <relation> <src> <dst>` lines.
  std::string dump() const;

  friend bool operator==(const HeteroGraph& a, const HeteroGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend HeteroGraph build_graph(const Corpus&, std::span<const std::uint8_t>, GraphOptions);
  friend HeteroGraph retype_mention_edges(const HeteroGraph&, std::span<const std::uint8_t>);

  void set_mention_edges();
  void finalize();

  std::vector<Node> nodes_;
  std::size_t num_authors_ = 0;
  std::size_t num_tweets_ = 0;
  std::size_t num_mentions_ = 0;
  std::size_t tweet_base_ = 0;
  std::size_t mention_base_ = 0;
  bool author_network_dropped_ = false;
  std::vector<std::uint32_t> tweet_author_;
  std::vector<std::uint32_t> mention_tweet_;
  std::vector<std::uint8_t> mention_frames_;
  std::array<std::vector<Edge>, kNumRelations> edges_;
  std::array<RelationIndex, kNumRelations> incoming_;
  std::array<std::vector<std::uint32_t>, kNumRelations> in_degree_;
};

/// Builds the graph. `mention_frames` holds one frame index per corpus mention;
/// when empty every mention edge starts as MentionPosActor.
HeteroGraph build_graph(const Corpus& corpus, std::span<const std::uint8_t> mention_frames = {},
                        GraphOptions options = {});

/// Copy of `g` with mention edges retyped. Throws DataError if `mention_frames`
/// does not cover every mention.
HeteroGraph retype_mention_edges(const HeteroGraph& g, std::span<const std::uint8_t> mention_frames);

}  // namespace perspectra
