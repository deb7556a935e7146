#include "perspectra/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "perspectra/error.hpp"
#include "perspectra/graph.hpp"
#include "perspectra/rng.hpp"
#include "text_util.hpp"

namespace perspectra {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

void normalize(std::vector<float>& v) {
  double norm = 0.0;
  for (const float x : v) norm += static_cast<double>(x) * x;
  if (norm == 0.0) return;
  const double inv = 1.0 / std::sqrt(norm);
  for (auto& x : v) x = static_cast<float>(x * inv);
}

void check_finite(const std::vector<float>& v, const std::string& key) {
  for (const float x : v) {
    if (!std::isfinite(x)) throw DataError("non-finite embedding value for " + key);
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::string token;
    if ((c == '#' || c == '@') && i + 1 < text.size() && is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      token.push_back(static_cast<char>(c));
      ++i;
    } else if (!is_word_byte(c)) {
      ++i;
      continue;
    }
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) {
      const auto b = static_cast<unsigned char>(text[i]);
      token.push_back(b >= 'A' && b <= 'Z' ? static_cast<char>(b - 'A' + 'a') : static_cast<char>(b));
      ++i;
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<float> hash_featurize(std::string_view text, std::size_t d) {
  std::vector<float> v(d, 0.0f);
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = fnv1a64(token);
    const auto index = static_cast<std::uint32_t>(h & 0xffffffffULL);
    const auto sign_bits = static_cast<std::int32_t>(static_cast<std::uint32_t>(h >> 32));
    v[index % d] += sign_bits < 0 ? -1.0f : 1.0f;
  }
  normalize(v);
  return v;
}

HashFeaturizer::HashFeaturizer(std::size_t d) : d_(d) {
  if (d < 8 || (d & (d - 1)) != 0) {
    throw UsageError("feature dimension must be a power of two >= 8, got " + std::to_string(d));
  }
}

EmbeddingImport EmbeddingImport::parse(const std::string& text) {
  EmbeddingImport out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    if (!have_header) {
      if (!body.starts_with("dim=")) throw DataError("embedding import line 1: expected dim=<d> header");
      try {
        out.dim = std::stoul(std::string(body.substr(4)));
      } catch (const std::exception&) {
        throw DataError("embedding import: bad dim header");
      }
      if (out.dim == 0) throw DataError("embedding import: dim must be positive");
      have_header = true;
      continue;
    }
    const auto tab = body.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("embedding import line " + std::to_string(line_no) + ": expected <kind>:<id>\\t<values>");
    }
    const std::string key(detail::trim(body.substr(0, tab)));
    std::vector<float> values;
    for (const auto& field : detail::split_trimmed(body.substr(tab + 1), ',')) {
      try {
        values.push_back(std::stof(field));
      } catch (const std::exception&) {
        throw DataError("embedding import line " + std::to_string(line_no) + ": bad value '" + field + "'");
      }
    }
    if (values.size() != out.dim) {
      throw DataError("embedding import line " + std::to_string(line_no) + ": expected " + std::to_string(out.dim) +
                      " values, got " + std::to_string(values.size()));
    }
    check_finite(values, key);
    out.rows.emplace_back(key, std::move(values));
  }
  if (!have_header) throw DataError("embedding import: missing dim=<d> header");
  return out;
}

EmbeddingImport EmbeddingImport::load(const std::filesystem::path& path) { return parse(detail::read_file(path)); }

std::vector<std::size_t> author_feature_tweets(const Corpus& corpus, std::size_t author, std::uint64_t seed) {
  std::vector<std::size_t> own = corpus.author_tweets(author);
  if (corpus.authors()[author].imaginary || own.size() <= kAuthorTweetSample) return own;
  Rng rng(derive_seed(seed, author));
  std::vector<std::size_t> picked;
  for (const auto i : rng.sample_indices(own.size(), kAuthorTweetSample)) picked.push_back(own[i]);
  std::sort(picked.begin(), picked.end());
  return picked;
}

NodeFeatures build_node_features(const Corpus& corpus, const HeteroGraph& graph, const Featurizer& f,
                                 std::uint64_t seed, const EmbeddingImport* import) {
  const std::size_t d = f.dim();
  if (import != nullptr && import->dim != d) {
    throw DataError("embedding import dim " + std::to_string(import->dim) + " does not match feature dim " +
                    std::to_string(d));
  }
  NodeFeatures out{Matrix<float>(graph.num_nodes(), d)};
  auto set_row = [&](std::size_t node, const std::vector<float>& v) {
    std::copy(v.begin(), v.end(), out.values.row(node).begin());
  };

  const auto& tweets = corpus.tweets();
  for (std::size_t t = 0; t < tweets.size(); ++t) set_row(graph.tweet_node(t), f.featurize(tweets[t].text));
  for (std::size_t m = 0; m < corpus.num_mentions(); ++m) {
    set_row(graph.mention_node(m), f.featurize(corpus.mention(m).surface));
  }
  for (std::size_t i = graph.mention_node(corpus.num_mentions()); i < graph.num_nodes(); ++i) {
    set_row(i, f.featurize(graph.node(i).id));
  }

  if (graph.has_author_network()) {
    const auto& authors = corpus.authors();
    for (std::size_t a = 0; a < authors.size(); ++a) {
      const auto node = *graph.author_node(a);
      if (authors[a].profile) {
        set_row(node, f.featurize(*authors[a].profile));
        continue;
      }
      const auto picked = author_feature_tweets(corpus, a, seed);
      if (picked.empty()) {
        std::clog << "warning: author " << authors[a].id << " has no profile and no tweets; using a zero vector\n";
        continue;
      }
      std::vector<double> sum(d, 0.0);
      for (const auto t : picked) {
        const auto row = out.values.row(graph.tweet_node(t));
        for (std::size_t j = 0; j < d; ++j) sum[j] += row[j];
      }
      std::vector<float> mean(d);
      for (std::size_t j = 0; j < d; ++j) mean[j] = static_cast<float>(sum[j] / static_cast<double>(picked.size()));
      normalize(mean);
      set_row(node, mean);
    }
  }

  if (import != nullptr) {
    std::unordered_map<std::string, std::size_t> by_key;
    for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
      by_key.emplace(std::string(to_string(graph.node(i).kind)) + ":" + graph.node(i).id, i);
    }
    for (const auto& [key, values] : import->rows) {
      if (const auto it = by_key.find(key); it != by_key.end()) set_row(it->second, values);
    }
  }
  return out;
}

}  // namespace perspectra
