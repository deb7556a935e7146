#include "perspectra/selftrain.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "perspectra/error.hpp"
#include "perspectra/lexicon.hpp"
#include "perspectra/rng.hpp"

namespace perspectra {
namespace {

std::size_t argmax(std::span<const float> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

bool confident(std::span<const float> row, double c) {
  return static_cast<double>(*std::max_element(row.begin(), row.end())) >= c;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::size_t parse_count(const std::string& s, std::string_view what) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw DataError("checkpoint value for " + std::string(what) + " is not a count: " + s);
  }
}

double parse_real(const std::string& s, std::string_view what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("checkpoint value for " + std::string(what) + " is not a number: " + s);
  }
}

void put_adam(Checkpoint& ckpt, const AdamWState<float>& st, const std::string& prefix,
              const std::vector<std::string>& names) {
  ckpt.set(prefix + "step", std::to_string(st.step));
  for (std::size_t i = 0; i < st.m.size(); ++i) {
    ckpt.put(prefix + "m." + names[i], st.m[i]);
    ckpt.put(prefix + "v." + names[i], st.v[i]);
  }
}

void get_adam(const Checkpoint& ckpt, AdamWState<float>& st, const std::string& prefix,
              const std::vector<std::string>& names) {
  st.step = parse_count(ckpt.require(prefix + "step"), prefix + "step");
  st.m.clear();
  st.v.clear();
  if (st.step == 0) return;
  for (const auto& name : names) {
    st.m.push_back(ckpt.tensor(prefix + "m." + name));
    st.v.push_back(ckpt.tensor(prefix + "v." + name));
  }
}

std::vector<std::string> param_names(const ModelParams<float>& p) {
  std::vector<std::string> names;
  p.visit([&](const std::string& name, const Matrix<float>&) { names.push_back(name); });
  return names;
}

std::string_view phase_name(SelfTrainer::Phase p) {
  switch (p) {
    case SelfTrainer::Phase::Warmup: return "warmup";
    case SelfTrainer::Phase::Loop: return "loop";
    case SelfTrainer::Phase::Done: return "done";
  }
  return "?";
}

}  // namespace

double SelfTrainConfig::confidence_at(std::size_t epoch) const {
  return epoch <= confidence_switch_epoch ? confidence_high : confidence_low;
}

std::size_t SelfTrainConfig::author_threshold_at(std::size_t epoch) const {
  std::size_t t = author_thresholds.empty() ? 1 : author_thresholds.front().second;
  for (const auto& [from, value] : author_thresholds) {
    if (epoch >= from) t = value;
  }
  return t;
}

void SelfTrainConfig::validate() const {
  if (k == 0) throw UsageError("k must be at least 1");
  for (const double c : {confidence_high, confidence_low, stop_fraction}) {
    if (!(c >= 0.0 && c <= 1.0)) throw UsageError("confidence and stop thresholds must lie in [0, 1]");
  }
  if (confidence_low > confidence_high) throw UsageError("confidence schedule must be non-increasing");
  for (std::size_t i = 0; i < author_thresholds.size(); ++i) {
    if (author_thresholds[i].second == 0) throw UsageError("author thresholds must be at least 1");
    if (i > 0 && (author_thresholds[i].first <= author_thresholds[i - 1].first ||
                  author_thresholds[i].second > author_thresholds[i - 1].second)) {
      throw UsageError("author threshold schedule must have rising epochs and non-increasing values");
    }
  }
  if (stop_patience == 0) throw UsageError("stop_patience must be at least 1");
  if (prior_batch_size == 0) throw UsageError("prior_batch_size must be at least 1");
}

Reliability check_reliable(const Predictions<float>& pred, double c) {
  Reliability rel;
  const auto flags = [c](const Matrix<float>& m) {
    std::vector<std::uint8_t> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = confident(m.row(i), c) ? 1 : 0;
    return out;
  };
  rel.tweet_stance = flags(pred.tweet_stance);
  rel.sentiment = flags(pred.sentiment);
  rel.role = flags(pred.role);
  rel.mapping = flags(pred.mapping);
  return rel;
}

Stance predicted_stance(const Predictions<float>& pred, std::size_t tweet) {
  const auto row = pred.tweet_stance.row(tweet);
  return row[1] > row[0] ? Stance::ProBlueLM : Stance::ProBlackLM;
}

Perspective predicted_perspective(const Predictions<float>& pred, std::size_t mention) {
  return Perspective{entity_from_code(static_cast<int>(argmax(pred.mapping.row(mention)))),
                     static_cast<Sentiment>(argmax(pred.sentiment.row(mention))),
                     static_cast<Role>(argmax(pred.role.row(mention)))};
}

bool check_tweet_consistency(const Corpus& corpus, std::size_t tweet, const Predictions<float>& pred,
                             const PerspectiveTable& table, const Reliability& rel) {
  if (!rel.tweet_stance.at(tweet)) return false;
  const Stance stance = predicted_stance(pred, tweet);
  const std::size_t first = corpus.first_mention(tweet);
  const std::size_t count = corpus.tweets()[tweet].entities.size();
  for (std::size_t m = first; m < first + count; ++m) {
    if (!(rel.mapping[m] && rel.sentiment[m] && rel.role[m])) continue;
    if (!table.contains(stance, predicted_perspective(pred, m))) return false;
  }
  return true;
}

std::optional<Stance> check_author_consistency(std::span<const Stance> consistent_stances, std::size_t t) {
  if (consistent_stances.empty() || consistent_stances.size() < t) return std::nullopt;
  const Stance first = consistent_stances.front();
  for (const Stance s : consistent_stances) {
    if (s != first) return std::nullopt;
  }
  return first;
}

InferenceOutcome apply_consistency(const Corpus& corpus, const Predictions<float>& pred,
                                   const PerspectiveTable& table, LabelSet& labels, double c, std::size_t t) {
  const Reliability rel = check_reliable(pred, c);
  InferenceOutcome out;
  for (std::size_t a = 0; a < corpus.authors().size(); ++a) {
    std::vector<std::size_t> tweets;
    std::vector<Stance> stances;
    for (const auto tw : corpus.author_tweets(a)) {
      if (!check_tweet_consistency(corpus, tw, pred, table, rel)) continue;
      tweets.push_back(tw);
      stances.push_back(predicted_stance(pred, tw));
    }
    const auto stance = check_author_consistency(stances, t);
    if (!stance) continue;
    out.consistent_authors.push_back(a);
    for (const auto tw : tweets) {
      if (labels.add_tweet(tw, *stance, LabelOrigin::Pseudo)) ++out.new_tweets;
      // A tweet frozen earlier with the other stance keeps its mentions unlabeled.
      if (labels.tweet(tw)->stance != *stance) continue;
      const std::size_t first = corpus.first_mention(tw);
      for (std::size_t m = first; m < first + corpus.tweets()[tw].entities.size(); ++m) {
        if (!(rel.mapping[m] && rel.sentiment[m] && rel.role[m])) continue;
        if (labels.add_mention(m, predicted_perspective(pred, m), LabelOrigin::Pseudo)) ++out.new_mentions;
      }
    }
  }
  const auto total = corpus.tweets().size();
  out.new_fraction = total == 0 ? 0.0 : static_cast<double>(out.new_tweets) / static_cast<double>(total);
  return out;
}

std::vector<std::optional<Stance>> predict_author_stances(const Corpus& corpus, const Predictions<float>& pred) {
  std::vector<std::optional<Stance>> out(corpus.authors().size());
  for (std::size_t a = 0; a < out.size(); ++a) {
    const auto& tweets = corpus.author_tweets(a);
    if (tweets.empty()) continue;
    std::size_t votes[2] = {0, 0};
    double mass[2] = {0, 0};
    for (const auto t : tweets) {
      ++votes[code(predicted_stance(pred, t))];
      mass[0] += pred.tweet_stance(t, 0);
      mass[1] += pred.tweet_stance(t, 1);
    }
    if (votes[0] != votes[1]) {
      out[a] = votes[1] > votes[0] ? Stance::ProBlueLM : Stance::ProBlackLM;
    } else {
      out[a] = mass[1] > mass[0] ? Stance::ProBlueLM : Stance::ProBlackLM;
    }
  }
  return out;
}

std::string metrics_csv(const std::vector<EpochRecord>& log) {
  std::ostringstream out;
  out << "epoch,total_loss,tweet_stance,sentiment,role,mapping,entity_stance,sentiment_align,role_align,"
         "labelset_tweets,labelset_mentions,new_fraction\n";
  for (const auto& r : log) {
    const auto& l = r.loss;
    out << r.epoch << ',' << fmt_metric(l.total()) << ',' << fmt_metric(l.tweet_stance) << ','
        << fmt_metric(l.sentiment) << ',' << fmt_metric(l.role) << ',' << fmt_metric(l.mapping) << ','
        << fmt_metric(l.entity_stance) << ',' << fmt_metric(l.sentiment_align) << ',' << fmt_metric(l.role_align)
        << ',' << r.labelset_tweets << ',' << r.labelset_mentions << ',';
    if (r.new_fraction) out << fmt_metric(*r.new_fraction);
    out << '\n';
  }
  return out.str();
}

SelfTrainer::SelfTrainer(const Corpus& corpus, const NodeFeatures& features, const PerspectiveTable& table,
                         LabelSet seeds, ModelConfig model_cfg, SelfTrainConfig cfg, PriorWeights priors)
    : corpus_(corpus),
      features_(features),
      table_(table),
      model_cfg_(model_cfg),
      cfg_(std::move(cfg)),
      labels_(std::move(seeds)) {
  cfg_.validate();
  if (labels_.num_tweets() != corpus.tweets().size() || labels_.num_mentions() != corpus.num_mentions()) {
    throw DataError("seed label set does not match the corpus");
  }
  if (labels_.size_tweets() == 0) throw UsageError("self-training needs a non-empty seed label set");
  if (features.dim() != model_cfg_.d_in) {
    throw DataError("feature dim " + std::to_string(features.dim()) + " != model d_in " +
                    std::to_string(model_cfg_.d_in));
  }

  params_ = ModelParams<float>::glorot(model_cfg_, derive_seed(model_cfg_.seed, 0x1417ULL));
  params_.prior_sentiment = std::move(priors.sentiment);
  params_.prior_role = std::move(priors.role);
  if (params_.prior_sentiment.rows() != model_cfg_.d_in || params_.prior_role.rows() != model_cfg_.d_in) {
    throw DataError("prior classifier weights do not match d_in");
  }
  opt_.config.lr = model_cfg_.lr;
  opt_.config.weight_decay = model_cfg_.weight_decay;
  prior_opt_.config = opt_.config;

  graph_ = std::make_unique<HeteroGraph>(build_graph(corpus, {}, GraphOptions{model_cfg_.author_network}));
  rebuild_inputs();
  // Type mention edges by the priors' current argmax.
  const auto frames = prior_frames(PriorWeights{params_.prior_sentiment, params_.prior_role}, inputs_.mention_features);
  graph_ = std::make_unique<HeteroGraph>(retype_mention_edges(*graph_, frames));
  rebuild_inputs();
  targets_ = labels_.targets(graph_->mention_tweet());
}

void SelfTrainer::rebuild_inputs() {
  if (features_.values.rows() != graph_->num_nodes()) {
    throw DataError("feature rows " + std::to_string(features_.values.rows()) + " != graph nodes " +
                    std::to_string(graph_->num_nodes()));
  }
  inputs_ = prepare_inputs<float>(*graph_, features_.values, model_cfg_.input_scale);
}

Predictions<float> SelfTrainer::predict() const { return perspectra::predict(params_, inputs_); }

void SelfTrainer::train_epoch() {
  const LossTerms loss = train_step(params_, opt_, inputs_, targets_);
  ++epoch_;
  log_.push_back(EpochRecord{epoch_, loss, labels_.size_tweets(), labels_.size_mentions(), std::nullopt});
}

void SelfTrainer::inference() {
  const auto pred = predict();
  const auto outcome = apply_consistency(corpus_, pred, table_, labels_, cfg_.confidence_at(epoch_),
                                         cfg_.author_threshold_at(epoch_));

  // Refresh the prior classifiers on the grown label set.
  std::vector<int> sent(labels_.num_mentions(), 0), role(labels_.num_mentions(), 0);
  std::vector<std::uint8_t> mask(labels_.num_mentions(), 0);
  for (std::size_t m = 0; m < labels_.num_mentions(); ++m) {
    if (const auto& l = labels_.mention(m)) {
      sent[m] = code(l->triple.sentiment);
      role[m] = code(l->triple.role);
      mask[m] = 1;
    }
  }
  PriorWeights priors{params_.prior_sentiment, params_.prior_role};
  prior_pass(priors, prior_opt_, inputs_.mention_features, sent, role, mask, cfg_.prior_batch_size,
             derive_seed(model_cfg_.seed, 0x9A55ULL + epoch_));
  params_.prior_sentiment = std::move(priors.sentiment);
  params_.prior_role = std::move(priors.role);

  if (cfg_.refresh_mention_edges) {
    const auto frames =
        prior_frames(PriorWeights{params_.prior_sentiment, params_.prior_role}, inputs_.mention_features);
    if (frames != graph_->mention_frames()) {
      graph_ = std::make_unique<HeteroGraph>(retype_mention_edges(*graph_, frames));
      rebuild_inputs();
    }
  }
  targets_ = labels_.targets(graph_->mention_tweet());

  auto& rec = log_.back();
  rec.new_fraction = outcome.new_fraction;
  rec.labelset_tweets = labels_.size_tweets();
  rec.labelset_mentions = labels_.size_mentions();
  labelset_history_.push_back(labels_.size_tweets());
  low_steps_ = outcome.new_fraction < cfg_.stop_fraction ? low_steps_ + 1 : 0;
}

bool SelfTrainer::step() {
  if (phase_ == Phase::Done) return false;
  train_epoch();
  if (phase_ == Phase::Warmup) {
    const double total = log_.back().loss.total();
    if (epoch_ == 1 || total < best_warmup_loss_) {
      best_warmup_loss_ = total;
      warmup_since_best_ = 0;
    } else {
      ++warmup_since_best_;
    }
    const bool plateau = epoch_ >= cfg_.warmup_min_epochs && warmup_since_best_ >= cfg_.warmup_patience;
    if (plateau || epoch_ >= cfg_.warmup_max_epochs) {
      if (!cfg_.self_learning) {
        phase_ = Phase::Done;
        stop_reason_ = plateau ? "warmup_plateau" : "warmup_cap";
      } else if (epoch_ >= cfg_.max_epochs) {
        phase_ = Phase::Done;
        stop_reason_ = "max_epochs";
      } else {
        phase_ = Phase::Loop;
      }
    }
    return phase_ != Phase::Done;
  }

  ++loop_epochs_;
  if (loop_epochs_ % cfg_.k == 0) inference();
  if (low_steps_ >= cfg_.stop_patience) {
    phase_ = Phase::Done;
    stop_reason_ = "converged";
  } else if (epoch_ >= cfg_.max_epochs) {
    phase_ = Phase::Done;
    stop_reason_ = "max_epochs";
  }
  return phase_ != Phase::Done;
}

void SelfTrainer::run(std::optional<std::size_t> until_epoch) {
  while (phase_ != Phase::Done) {
    if (until_epoch && epoch_ >= *until_epoch) return;
    step();
  }
}

void put_model_config(Checkpoint& ckpt, const ModelConfig& cfg) {
  ckpt.set("model.d_in", std::to_string(cfg.d_in));
  ckpt.set("model.d_h1", std::to_string(cfg.d_h1));
  ckpt.set("model.d_h2", std::to_string(cfg.d_h2));
  ckpt.set("model.lr", fmt_double(cfg.lr));
  ckpt.set("model.weight_decay", fmt_double(cfg.weight_decay));
  ckpt.set("model.input_scale", fmt_double(cfg.input_scale));
  ckpt.set("model.seed", std::to_string(cfg.seed));
  ckpt.set("model.author_network", cfg.author_network ? "1" : "0");
}

ModelConfig get_model_config(const Checkpoint& ckpt) {
  ModelConfig cfg;
  cfg.d_in = parse_count(ckpt.require("model.d_in"), "model.d_in");
  cfg.d_h1 = parse_count(ckpt.require("model.d_h1"), "model.d_h1");
  cfg.d_h2 = parse_count(ckpt.require("model.d_h2"), "model.d_h2");
  cfg.lr = parse_real(ckpt.require("model.lr"), "model.lr");
  cfg.weight_decay = parse_real(ckpt.require("model.weight_decay"), "model.weight_decay");
  cfg.input_scale = parse_real(ckpt.require("model.input_scale"), "model.input_scale");
  cfg.seed = parse_count(ckpt.require("model.seed"), "model.seed");
  cfg.author_network = ckpt.require("model.author_network") == "1";
  return cfg;
}

void put_params(Checkpoint& ckpt, const ModelParams<float>& p, const std::string& prefix) {
  p.visit([&](const std::string& name, const Matrix<float>& m) { ckpt.put(prefix + name, m); });
}

ModelParams<float> get_params(const Checkpoint& ckpt, const ModelConfig& cfg, const std::string& prefix) {
  auto p = ModelParams<float>::zeros(cfg);
  p.visit([&](const std::string& name, Matrix<float>& m) {
    const auto& t = ckpt.tensor(prefix + name);
    if (t.rows() != m.rows() || t.cols() != m.cols()) {
      throw DataError("checkpoint tensor " + prefix + name + " has shape " + std::to_string(t.rows()) + "x" +
                      std::to_string(t.cols()) + ", expected " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
    }
    m = t;
  });
  return p;
}

Checkpoint SelfTrainer::checkpoint() const {
  Checkpoint ckpt;
  put_model_config(ckpt, model_cfg_);
  ckpt.set("graph.nodes", std::to_string(graph_->num_nodes()));
  ckpt.set("graph.tweets", std::to_string(graph_->num_tweets()));
  ckpt.set("graph.mentions", std::to_string(graph_->num_mentions()));
  ckpt.set("state.phase", std::string(phase_name(phase_)));
  ckpt.set("state.epoch", std::to_string(epoch_));
  ckpt.set("state.loop_epochs", std::to_string(loop_epochs_));
  ckpt.set("state.best_warmup_loss", fmt_double(best_warmup_loss_));
  ckpt.set("state.warmup_since_best", std::to_string(warmup_since_best_));
  ckpt.set("state.low_steps", std::to_string(low_steps_));
  ckpt.set("state.stop_reason", stop_reason_);
  for (std::size_t i = 0; i < log_.size(); ++i) {
    const auto& r = log_[i];
    const auto& l = r.loss;
    std::string v = std::to_string(r.epoch);
    for (const double x : {l.tweet_stance, l.sentiment, l.role, l.mapping, l.entity_stance, l.sentiment_align,
                           l.role_align}) {
      v += "," + fmt_double(x);
    }
    v += "," + std::to_string(r.labelset_tweets) + "," + std::to_string(r.labelset_mentions) + ",";
    if (r.new_fraction) v += fmt_double(*r.new_fraction);
    ckpt.set("log." + std::to_string(i), v);
  }
  std::string history;
  for (const auto h : labelset_history_) history += (history.empty() ? "" : ",") + std::to_string(h);
  ckpt.set("state.labelset_history", history);

  put_params(ckpt, params_);
  const auto names = param_names(params_);
  put_adam(ckpt, opt_, "adam.", names);
  put_adam(ckpt, prior_opt_, "prior_adam.", {"sentiment", "role"});

  Matrix<float> frames(1, graph_->num_mentions());
  for (std::size_t m = 0; m < graph_->num_mentions(); ++m) frames(0, m) = graph_->mention_frames()[m];
  ckpt.put("state.mention_frames", std::move(frames));

  // Labels: -1 marks "unlabeled"; origin 0 = seed, 1 = pseudo.
  Matrix<float> tweets(labels_.num_tweets(), 2, -1.0f);
  for (std::size_t t = 0; t < labels_.num_tweets(); ++t) {
    if (const auto& l = labels_.tweet(t)) {
      tweets(t, 0) = static_cast<float>(code(l->stance));
      tweets(t, 1) = static_cast<float>(l->origin);
    }
  }
  ckpt.put("state.tweet_labels", std::move(tweets));
  Matrix<float> mentions(labels_.num_mentions(), 4, -1.0f);
  for (std::size_t m = 0; m < labels_.num_mentions(); ++m) {
    if (const auto& l = labels_.mention(m)) {
      mentions(m, 0) = static_cast<float>(code(l->triple.entity));
      mentions(m, 1) = static_cast<float>(code(l->triple.sentiment));
      mentions(m, 2) = static_cast<float>(code(l->triple.role));
      mentions(m, 3) = static_cast<float>(l->origin);
    }
  }
  ckpt.put("state.mention_labels", std::move(mentions));
  Matrix<float> seeds(labels_.seed_authors().size(), 2);
  std::size_t row = 0;
  for (const auto& [a, s] : labels_.seed_authors()) {
    seeds(row, 0) = static_cast<float>(a);
    seeds(row, 1) = static_cast<float>(code(s));
    ++row;
  }
  ckpt.put("state.seed_authors", std::move(seeds));
  return ckpt;
}

void SelfTrainer::restore(const Checkpoint& ckpt) {
  const ModelConfig saved = get_model_config(ckpt);
  if (saved.d_in != model_cfg_.d_in || saved.d_h1 != model_cfg_.d_h1 || saved.d_h2 != model_cfg_.d_h2 ||
      saved.author_network != model_cfg_.author_network) {
    throw DataError("checkpoint model shape does not match the configured model");
  }
  if (parse_count(ckpt.require("graph.nodes"), "graph.nodes") != graph_->num_nodes() ||
      parse_count(ckpt.require("graph.mentions"), "graph.mentions") != graph_->num_mentions()) {
    throw DataError("checkpoint was trained on a different corpus (node counts differ)");
  }
  params_ = get_params(ckpt, model_cfg_);
  get_adam(ckpt, opt_, "adam.", param_names(params_));
  get_adam(ckpt, prior_opt_, "prior_adam.", {"sentiment", "role"});

  const auto& frames_t = ckpt.tensor("state.mention_frames");
  std::vector<std::uint8_t> frames(graph_->num_mentions());
  for (std::size_t m = 0; m < frames.size(); ++m) frames[m] = static_cast<std::uint8_t>(frames_t(0, m));
  graph_ = std::make_unique<HeteroGraph>(retype_mention_edges(*graph_, frames));
  rebuild_inputs();

  const auto& tweets = ckpt.tensor("state.tweet_labels");
  const auto& mentions = ckpt.tensor("state.mention_labels");
  if (tweets.rows() != corpus_.tweets().size() || mentions.rows() != corpus_.num_mentions()) {
    throw DataError("checkpoint label tables do not match the corpus");
  }
  LabelSet labels(corpus_.tweets().size(), corpus_.num_mentions());
  const auto& seeds = ckpt.tensor("state.seed_authors");
  for (std::size_t i = 0; i < seeds.rows(); ++i) {
    labels.add_seed_author(static_cast<std::size_t>(seeds(i, 0)), static_cast<Stance>(seeds(i, 1)));
  }
  for (std::size_t t = 0; t < tweets.rows(); ++t) {
    if (tweets(t, 0) < 0) continue;
    labels.add_tweet(t, static_cast<Stance>(tweets(t, 0)), static_cast<LabelOrigin>(tweets(t, 1)));
  }
  for (std::size_t m = 0; m < mentions.rows(); ++m) {
    if (mentions(m, 0) < 0) continue;
    labels.add_mention(m,
                       Perspective{entity_from_code(static_cast<int>(mentions(m, 0))),
                                   static_cast<Sentiment>(mentions(m, 1)), static_cast<Role>(mentions(m, 2))},
                       static_cast<LabelOrigin>(mentions(m, 3)));
  }
  labels_ = std::move(labels);
  targets_ = labels_.targets(graph_->mention_tweet());

  const auto& phase = ckpt.require("state.phase");
  phase_ = phase == "warmup" ? Phase::Warmup : phase == "loop" ? Phase::Loop : Phase::Done;
  epoch_ = parse_count(ckpt.require("state.epoch"), "state.epoch");
  loop_epochs_ = parse_count(ckpt.require("state.loop_epochs"), "state.loop_epochs");
  best_warmup_loss_ = parse_real(ckpt.require("state.best_warmup_loss"), "state.best_warmup_loss");
  warmup_since_best_ = parse_count(ckpt.require("state.warmup_since_best"), "state.warmup_since_best");
  low_steps_ = parse_count(ckpt.require("state.low_steps"), "state.low_steps");
  stop_reason_ = ckpt.require("state.stop_reason");

  log_.clear();
  for (std::size_t i = 0;; ++i) {
    const auto v = ckpt.get("log." + std::to_string(i));
    if (!v) break;
    std::vector<std::string> f;
    std::stringstream ss(*v);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (v->back() == ',') f.emplace_back();
    if (f.size() != 11) throw DataError("malformed checkpoint log entry " + std::to_string(i));
    EpochRecord r;
    r.epoch = parse_count(f[0], "log epoch");
    r.loss = LossTerms{parse_real(f[1], "log"), parse_real(f[2], "log"), parse_real(f[3], "log"),
                       parse_real(f[4], "log"), parse_real(f[5], "log"), parse_real(f[6], "log"),
                       parse_real(f[7], "log")};
    r.labelset_tweets = parse_count(f[8], "log");
    r.labelset_mentions = parse_count(f[9], "log");
    if (!f[10].empty()) r.new_fraction = parse_real(f[10], "log");
    log_.push_back(r);
  }
  labelset_history_.clear();
  std::stringstream hs(ckpt.require("state.labelset_history"));
  std::string h;
  while (std::getline(hs, h, ',')) labelset_history_.push_back(parse_count(h, "labelset history"));
}

}  // namespace perspectra
