#include "perspectra/experiment.hpp"

#include <algorithm>
#include <stdexcept>

#include "perspectra/error.hpp"
#include "perspectra/graph.hpp"
#include "perspectra/rng.hpp"

namespace perspectra {
namespace {

std::uint64_t parse_u64(const std::string& s, std::string_view key) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("checkpoint value for " + std::string(key) + " is not a count: " + s);
  }
}

bool has_imaginary(const Corpus& c) {
  return std::any_of(c.authors().begin(), c.authors().end(), [](const Author& a) { return a.imaginary; });
}

bool has_labeled_authors(const Corpus& c) {
  return std::any_of(c.authors().begin(), c.authors().end(),
                     [](const Author& a) { return a.gold_stance && !a.imaginary; });
}

}  // namespace

std::string_view to_string(SupervisionMode m) { return m == SupervisionMode::Direct ? "direct" : "weak"; }

std::optional<SupervisionMode> parse_supervision_mode(std::string_view token) {
  if (token == "direct") return SupervisionMode::Direct;
  if (token == "weak") return SupervisionMode::Weak;
  return std::nullopt;
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::TextAsGraph: return "text_as_graph";
    case Variant::AuthorNetwork: return "author_network";
    case Variant::Full: return "full";
  }
  return "full";
}

ExperimentConfig variant_config(ExperimentConfig base, Variant v) {
  if (v == Variant::Full) return base;
  base.model.author_network = v == Variant::AuthorNetwork;
  base.train.self_learning = false;
  base.train.warmup_min_epochs = 15;
  base.train.warmup_max_epochs = base.train.max_epochs;
  return base;
}

Corpus weak_seed_corpus(const GenConfig& gen, const Lexicon& lexicon, const PerspectiveTable& table) {
  GenConfig w = gen;
  w.mode = GenMode::WeakSupervision;
  w.seed = derive_seed(gen.seed, 0x57EAULL);
  w.behavior_alignment.reset();
  w.id_prefix.clear();
  return generate(w, lexicon, table);
}

Corpus prior_corpus(const GenConfig& gen, std::size_t n_authors, const Lexicon& lexicon,
                    const PerspectiveTable& table) {
  GenConfig p = gen;
  p.mode = GenMode::RealLike;
  p.n_authors = n_authors;
  p.seed = derive_seed(gen.seed, 0x9C0BULL);
  p.cue_rate = 1.0;
  p.behavior_alignment.reset();
  p.id_prefix = "prior_";
  return generate(p, lexicon, table);
}

Matrix<float> mention_features(const Corpus& corpus, const Featurizer& f, double scale) {
  Matrix<float> out(corpus.num_mentions(), f.dim());
  for (std::size_t m = 0; m < corpus.num_mentions(); ++m) {
    const auto v = f.featurize(corpus.mention(m).surface);
    auto row = out.row(m);
    for (std::size_t j = 0; j < v.size(); ++j) row[j] = v[j] * static_cast<float>(scale);
  }
  return out;
}

PriorFit fit_priors(const Corpus& corpus, const Featurizer& f, double scale, const PriorTrainConfig& cfg) {
  std::vector<std::size_t> rows;
  std::vector<int> sent, role;
  for (std::size_t m = 0; m < corpus.num_mentions(); ++m) {
    if (const auto& g = corpus.mention(m).gold) {
      rows.push_back(m);
      sent.push_back(code(g->sentiment));
      role.push_back(code(g->role));
    }
  }
  const auto all = mention_features(corpus, f, scale);
  Matrix<float> x(rows.size(), all.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = all.row(rows[i]);
    std::copy(src.begin(), src.end(), x.row(i).begin());
  }
  return pretrain_priors(x, sent, role, cfg);
}

AuthorSplit run_split(const Corpus& corpus, const ExperimentConfig& cfg) {
  return split_by_author(corpus, cfg.train_authors, cfg.seed);
}

AuthorSplit checkpoint_split(const Corpus& corpus, const Checkpoint& ckpt) {
  return split_by_author(corpus, parse_u64(ckpt.require("run.train_authors"), "run.train_authors"),
                         parse_u64(ckpt.require("run.seed"), "run.seed"));
}

Experiment::Experiment(ExperimentConfig cfg, Corpus corpus, std::optional<Corpus> weak_seed, const Lexicon& lexicon,
                       PerspectiveTable table)
    : cfg_(std::move(cfg)), table_(std::move(table)) {
  cfg_.model.seed = cfg_.seed;
  cfg_.prior.seed = cfg_.seed;
  cfg_.gen.validate();
  cfg_.train.validate();

  // Weak supervision may run on an unlabeled corpus; there is then nothing to hold out.
  if (cfg_.mode == SupervisionMode::Direct || has_labeled_authors(corpus)) split_ = run_split(corpus, cfg_);
  std::vector<std::size_t> seed_authors;
  if (cfg_.mode == SupervisionMode::Direct) {
    corpus_ = std::move(corpus);
    seed_authors = split_.train_authors;
  } else {
    if (weak_seed) {
      corpus_ = merge_corpora(corpus, *weak_seed);
    } else if (has_imaginary(corpus)) {
      corpus_ = std::move(corpus);
    } else {
      corpus_ = merge_corpora(corpus, weak_seed_corpus(cfg_.gen, lexicon, table_));
    }
    for (std::size_t a = 0; a < corpus_.authors().size(); ++a) {
      if (corpus_.authors()[a].imaginary) seed_authors.push_back(a);
    }
    if (seed_authors.empty()) throw DataError("weak supervision needs imaginary seed authors");
  }
  auto seeds = LabelSet::from_gold_authors(corpus_, seed_authors);

  const HashFeaturizer featurizer(cfg_.model.d_in);
  {
    const auto graph = build_graph(corpus_, {}, GraphOptions{cfg_.model.author_network});
    features_ = build_node_features(corpus_, graph, featurizer, cfg_.seed);
  }
  priors_ = fit_priors(prior_corpus(cfg_.gen, cfg_.prior_authors, lexicon, table_), featurizer,
                       cfg_.model.input_scale, cfg_.prior);
  trainer_ = std::make_unique<SelfTrainer>(corpus_, features_, table_, std::move(seeds), cfg_.model, cfg_.train,
                                           priors_.weights);
}

PredictedLabels Experiment::predicted() const { return predicted_labels(corpus_, trainer_->predict()); }

TaskReport Experiment::evaluate() const {
  return evaluate_tasks(corpus_, predicted(), split_.test_authors, split_.test_tweets);
}

TaskReport Experiment::evaluate_keyword() const {
  PredictedLabels kw;
  kw.tweets = keyword_stances(corpus_, cfg_.seed);
  kw.authors = vote_author_stances(corpus_, kw.tweets);
  return evaluate_tasks(corpus_, kw, split_.test_authors, split_.test_tweets);
}

Checkpoint Experiment::checkpoint() const {
  auto ckpt = trainer_->checkpoint();
  ckpt.set("run.mode", std::string(to_string(cfg_.mode)));
  ckpt.set("run.seed", std::to_string(cfg_.seed));
  ckpt.set("run.train_authors", std::to_string(cfg_.train_authors));
  ckpt.set("features.kind", "hash");
  ckpt.set("features.seed", std::to_string(cfg_.seed));
  return ckpt;
}

Predictions<float> infer_from_checkpoint(const Corpus& corpus, const Checkpoint& ckpt) {
  const auto cfg = get_model_config(ckpt);
  if (const auto kind = ckpt.get("features.kind"); kind && *kind != "hash") {
    throw DataError("checkpoint uses unsupported features " + *kind);
  }
  const auto base = build_graph(corpus, {}, GraphOptions{cfg.author_network});
  const auto expect = [&](const char* key, std::size_t actual) {
    const auto recorded = parse_u64(ckpt.require(key), key);
    if (recorded != actual) {
      throw DataError(std::string("checkpoint/corpus mismatch: ") + key + " is " + std::to_string(recorded) +
                      " in the checkpoint but " + std::to_string(actual) + " for the corpus");
    }
  };
  expect("graph.nodes", base.num_nodes());
  expect("graph.tweets", base.num_tweets());
  expect("graph.mentions", base.num_mentions());

  const auto& saved = ckpt.tensor("state.mention_frames");
  if (saved.size() != base.num_mentions()) throw DataError("checkpoint/corpus mismatch: mention frame count");
  std::vector<std::uint8_t> frames(saved.size());
  for (std::size_t m = 0; m < frames.size(); ++m) frames[m] = static_cast<std::uint8_t>(saved.flat()[m]);
  const auto graph = retype_mention_edges(base, frames);

  const HashFeaturizer featurizer(cfg.d_in);
  const auto features =
      build_node_features(corpus, graph, featurizer, parse_u64(ckpt.require("features.seed"), "features.seed"));
  const auto params = get_params(ckpt, cfg);
  const auto inputs = prepare_inputs<float>(graph, features.values, cfg.input_scale);
  return predict(params, inputs);
}

}  // namespace perspectra
