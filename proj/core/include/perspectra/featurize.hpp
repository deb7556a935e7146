#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "perspectra/corpus.hpp"
#include "perspectra/numkit/matrix.hpp"

namespace perspectra {

class HeteroGraph;

/// Maps text to a fixed-width vector. Implementations must be pure and return
/// either the zero vector or a unit-norm vector.
class Featurizer {
 public:
  virtual ~Featurizer() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<float> featurize(std::string_view text) const = 0;
};

/// Lowercases and splits on non-alphanumerics; a leading '#' or '@' stays on its token.
/// Bytes >= 0x80 count as alphanumeric so UTF-8 words are kept whole.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s);

/// Signed feature hashing: token t adds sign(h2) at index h1 mod d, where h1/h2 are
/// the low/high 32-bit halves of fnv1a64(t) and sign is the sign of h2 read as int32.
/// The result is L2-normalized.
std::vector<float> hash_featurize(std::string_view text, std::size_t d);

class HashFeaturizer final : public Featurizer {
 public:
  /// d >= 8 and a power of two; throws UsageError otherwise.
  explicit HashFeaturizer(std::size_t d);
  std::size_t dim() const override { return d_; }
  std::vector<float> featurize(std::string_view text) const override { return hash_featurize(text, d_); }

 private:
  std::size_t d_;
};

/// Input representation per graph node (row = node ordinal).
struct NodeFeatures {
  Matrix<float> values;
  std::size_t dim() const { return values.cols(); }
};

/// Rows loaded from an embedding import file, keyed by "<kind>:<id>".
struct EmbeddingImport {
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::vector<float>>> rows;

  /// Format: a `dim=<d>` header line, then `<kind>:<id>\t<comma separated floats>`.
  static EmbeddingImport load(const std::filesystem::path& path);
  static EmbeddingImport parse(const std::string& text);
};

/// Number of tweets averaged for an author without a profile.
inline constexpr std::size_t kAuthorTweetSample = 5;

/// Tweet ordinals averaged for a profile-less author: min(5, n) of their tweets drawn from
/// a stream seeded by (seed, author ordinal). Imaginary authors use all their tweets.
std::vector<std::size_t> author_feature_tweets(const Corpus& corpus, std::size_t author, std::uint64_t seed);

/// Builds the input feature matrix aligned with `graph`'s node ordinals.
NodeFeatures build_node_features(const Corpus& corpus, const HeteroGraph& graph, const Featurizer& f,
                                 std::uint64_t seed, const EmbeddingImport* import = nullptr);

}  // namespace perspectra
