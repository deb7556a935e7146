#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "perspectra/error.hpp"
#include "perspectra/eval.hpp"
#include "perspectra/experiment.hpp"
#include "perspectra/run_config.hpp"

namespace fs = std::filesystem;
using namespace perspectra;

namespace {

enum class Command { Synth, Train, Infer, Eval, Pmi, Trends, Correlation };

// Every flag is kept as text and routed through RunConfig::set, so flags and
// config files share one validator.
struct Flags {
  std::optional<fs::path> config;
  std::vector<std::string> sets;
  std::optional<std::string> seed, out, mode, authors, ambiguous_rate, train_authors, max_epochs;
  std::optional<std::string> corpus, weak_corpus, checkpoint, lexicon, table;
  std::optional<fs::path> preds;
  std::optional<std::string> baseline;
  double min_frac = 0.005;
};

RunConfig resolve(Command cmd, const Flags& f) {
  RunConfig rc;
  if (f.config) rc.apply_file(*f.config);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got " + s);
    rc.set(s.substr(0, eq), s.substr(eq + 1));
  }
  const bool synth = cmd == Command::Synth;
  const auto put = [&rc](const char* key, const std::optional<std::string>& v) {
    if (v) rc.set(key, *v);
  };
  put(synth ? "gen.seed" : "run.seed", f.seed);
  put(synth ? "gen.mode" : "run.mode", f.mode);
  put("gen.n_authors", f.authors);
  put("gen.ambiguous_rate", f.ambiguous_rate);
  put("run.train_authors", f.train_authors);
  put("train.max_epochs", f.max_epochs);
  put("paths.out", f.out);
  put("paths.corpus", f.corpus);
  put("paths.weak_corpus", f.weak_corpus);
  put("paths.checkpoint", f.checkpoint);
  put("paths.lexicon", f.lexicon);
  put("paths.perspective_table", f.table);
  if (f.baseline && *f.baseline != "keyword") throw UsageError("unknown baseline " + *f.baseline);
  return rc;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Lexicon lexicon_of(const RunConfig& rc) { return rc.lexicon ? Lexicon::load(*rc.lexicon) : Lexicon::defaults(); }

PerspectiveTable table_of(const RunConfig& rc) {
  return rc.perspective_table ? PerspectiveTable::load(*rc.perspective_table) : PerspectiveTable::defaults();
}

fs::path corpus_path(const RunConfig& rc) { return rc.corpus.value_or(rc.out / "corpus.jsonl"); }
fs::path checkpoint_path(const RunConfig& rc) { return rc.checkpoint.value_or(rc.out / "checkpoint.bin"); }

int cmd_synth(const RunConfig& rc) {
  const auto& gen = rc.experiment.gen;
  gen.validate();
  const auto table = table_of(rc);
  const auto lexicon = lexicon_of(rc);
  lexicon.validate(table);
  const auto corpus = generate(gen, lexicon, table);
  save_corpus(corpus, rc.out / "corpus.jsonl");
  write_text(rc.out / "oracle.csv", oracle_labels(corpus).to_csv());
  std::clog << "synth: " << corpus.authors().size() << " authors, " << corpus.tweets().size() << " tweets, "
            << corpus.num_mentions() << " mentions -> " << (rc.out / "corpus.jsonl").string() << '\n';
  return 0;
}

std::optional<TaskReport> train_one(const RunConfig& rc, const ExperimentConfig& cfg, const fs::path& dir) {
  const auto table = table_of(rc);
  const auto lexicon = lexicon_of(rc);
  auto corpus = rc.corpus ? load_corpus(*rc.corpus) : generate(cfg.gen, lexicon, table);
  std::optional<Corpus> weak;
  if (rc.weak_corpus) weak = load_corpus(*rc.weak_corpus);

  Experiment ex(cfg, std::move(corpus), std::move(weak), lexicon, table);
  auto& trainer = ex.trainer();
  const auto n_tweets = ex.corpus().tweets().size();
  while (trainer.step()) {
    const auto& r = trainer.log().back();
    if (r.new_fraction) {
      std::clog << "epoch " << r.epoch << ": " << r.labelset_tweets << '/' << n_tweets << " tweets labeled, loss "
                << r.loss.total() << '\n';
    }
  }
  std::clog << "stopped at epoch " << trainer.epoch() << " (" << trainer.stop_reason() << "), "
            << trainer.labels().size_tweets() << '/' << n_tweets << " tweets labeled\n";

  RunConfig used = rc;
  used.experiment = cfg;
  write_text(dir / "config.txt", used.to_text());
  save_checkpoint(ex.checkpoint(), dir / "checkpoint.bin");
  write_text(dir / "metrics.csv", metrics_csv(trainer.log()));
  write_text(dir / "labels.jsonl", trainer.labels().to_jsonl(ex.corpus()));
  const auto pred = trainer.predict();
  write_text(dir / "preds.csv", preds_csv(ex.corpus(), predicted_labels(ex.corpus(), pred), &pred));
  save_corpus(ex.corpus(), dir / "corpus.jsonl");
  if (ex.split().test_tweets.empty()) return std::nullopt;
  auto report = ex.evaluate();
  write_text(dir / "eval.csv", report.to_csv());
  return report;
}

int cmd_train(const RunConfig& rc) {
  if (rc.seeds.empty()) {
    train_one(rc, rc.experiment, rc.out);
    return 0;
  }
  // Seed sweep: one run directory per seed plus the per-task mean.
  std::vector<TaskReport> reports;
  for (const auto seed : rc.seeds) {
    auto cfg = rc.experiment;
    cfg.seed = seed;
    std::clog << "seed " << seed << '\n';
    if (auto r = train_one(rc, cfg, rc.out / ("seed-" + std::to_string(seed)))) reports.push_back(*r);
  }
  if (reports.empty()) return 0;
  const auto n = static_cast<double>(reports.size());
  const auto mean = [&](auto member) {
    double macro = 0, weighted = 0;
    for (const auto& r : reports) {
      macro += (r.*member).macro_f1;
      weighted += (r.*member).weighted_f1;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%zu", macro / n, weighted / n, reports.size());
    return std::string(buf);
  };
  std::string csv = "task,macro_f1,weighted_f1,seeds\n";
  csv += "author_stance," + mean(&TaskReport::author) + '\n';
  csv += "tweet_stance," + mean(&TaskReport::all_tweets) + '\n';
  csv += "ambiguous_tweet_stance," + mean(&TaskReport::ambiguous_tweets) + '\n';
  csv += "entity_sentiment," + mean(&TaskReport::sentiment) + '\n';
  csv += "entity_role," + mean(&TaskReport::role) + '\n';
  csv += "entity_mapping," + mean(&TaskReport::mapping) + '\n';
  write_text(rc.out / "summary.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_infer(const RunConfig& rc) {
  const auto corpus = load_corpus(corpus_path(rc));
  const auto pred = infer_from_checkpoint(corpus, load_checkpoint(checkpoint_path(rc)));
  write_text(rc.out / "preds.csv", preds_csv(corpus, predicted_labels(corpus, pred), &pred));
  return 0;
}

PredictedLabels keyword_labels(const Corpus& corpus, std::uint64_t seed) {
  PredictedLabels kw;
  kw.tweets = keyword_stances(corpus, seed);
  kw.authors = vote_author_stances(corpus, kw.tweets);
  return kw;
}

int cmd_eval(const RunConfig& rc, const Flags& f) {
  const auto corpus = load_corpus(corpus_path(rc));
  std::optional<Checkpoint> ckpt;
  if ((!f.preds && !f.baseline) || rc.checkpoint) ckpt = load_checkpoint(checkpoint_path(rc));
  const auto split = ckpt ? checkpoint_split(corpus, *ckpt) : run_split(corpus, rc.experiment);

  PredictedLabels labels;
  if (f.baseline) {
    labels = keyword_labels(corpus, rc.experiment.seed);
  } else if (f.preds) {
    labels = parse_preds_csv(corpus, read_text(*f.preds));
  } else {
    labels = predicted_labels(corpus, infer_from_checkpoint(corpus, *ckpt));
  }
  const auto csv = evaluate_tasks(corpus, labels, split.test_authors, split.test_tweets).to_csv();
  write_text(rc.out / "eval.csv", csv);
  std::cout << csv;
  return 0;
}

// Labels an analysis runs on: predictions, a checkpoint's inference, the keyword
// baseline or, by default, the corpus gold.
struct AnalysisLabels {
  std::vector<Stance> tweets;
  std::vector<std::optional<Stance>> authors;
  std::vector<std::optional<Perspective>> mentions;
};

AnalysisLabels analysis_labels(const Corpus& corpus, const RunConfig& rc, const Flags& f) {
  AnalysisLabels out;
  const auto adopt = [&](PredictedLabels p) {
    out.tweets = std::move(p.tweets);
    out.authors = std::move(p.authors);
    out.mentions.assign(p.mentions.begin(), p.mentions.end());
    if (out.mentions.empty()) out.mentions.resize(corpus.num_mentions());
  };
  if (f.baseline) {
    adopt(keyword_labels(corpus, rc.experiment.seed));
  } else if (f.preds) {
    adopt(parse_preds_csv(corpus, read_text(*f.preds)));
  } else if (rc.checkpoint) {
    adopt(predicted_labels(corpus, infer_from_checkpoint(corpus, load_checkpoint(*rc.checkpoint))));
  } else {
    for (const auto& t : corpus.tweets()) {
      if (!t.gold_stance) throw DataError("tweet " + t.id + " has no gold stance; pass --preds or --checkpoint");
      out.tweets.push_back(*t.gold_stance);
    }
    for (const auto& a : corpus.authors()) out.authors.push_back(a.gold_stance);
    for (std::size_t m = 0; m < corpus.num_mentions(); ++m) out.mentions.push_back(corpus.mention(m).gold);
  }
  return out;
}

int cmd_analyze(Command cmd, const RunConfig& rc, const Flags& f) {
  const auto corpus = load_corpus(corpus_path(rc));
  const auto labels = analysis_labels(corpus, rc, f);
  if (cmd == Command::Correlation) {
    write_text(rc.out / "correlation.csv", behavior_correlations(corpus, labels.authors).to_csv());
    return 0;
  }
  if (cmd == Command::Trends) {
    write_text(rc.out / "trends.csv", temporal_trends(corpus, labels.tweets, labels.mentions));
    return 0;
  }
  std::vector<StancedPerspectives> tweets(corpus.tweets().size());
  for (std::size_t t = 0; t < tweets.size(); ++t) {
    tweets[t].stance = labels.tweets[t];
    const auto first = corpus.first_mention(t);
    for (std::size_t k = 0; k < corpus.tweets()[t].entities.size(); ++k) {
      if (const auto& p = labels.mentions[first + k]) tweets[t].perspectives.push_back(*p);
    }
  }
  write_text(rc.out / "pmi.csv", pmi(tweets, f.min_frac).to_csv());
  return 0;
}

int run(Command cmd, const Flags& f) {
  const auto rc = resolve(cmd, f);
  switch (cmd) {
    case Command::Synth: return cmd_synth(rc);
    case Command::Train: return cmd_train(rc);
    case Command::Infer: return cmd_infer(rc);
    case Command::Eval: return cmd_eval(rc, f);
    default: return cmd_analyze(cmd, rc, f);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stance and perspective detection with a relational graph model and self-learning"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", f.sets, "override one config key (section.key=value); repeatable");
  app.add_option("--seed", f.seed, "gen.seed for synth, run.seed otherwise");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--mode", f.mode, "direct | weak (gen.mode for synth, run.mode otherwise)");
  app.add_option("--authors", f.authors, "gen.n_authors");
  app.add_option("--ambiguous-rate", f.ambiguous_rate, "gen.ambiguous_rate");
  app.add_option("--train-authors", f.train_authors, "run.train_authors");
  app.add_option("--max-epochs", f.max_epochs, "train.max_epochs");
  app.add_option("--corpus", f.corpus, "corpus JSONL (default <out>/corpus.jsonl for infer/eval/analyze)");
  app.add_option("--weak-corpus", f.weak_corpus, "weak-supervision seed corpus JSONL");
  app.add_option("--checkpoint", f.checkpoint, "checkpoint (default <out>/checkpoint.bin for infer/eval)");
  app.add_option("--lexicon", f.lexicon, "lexicon file replacing the built-in one");
  app.add_option("--perspective-table", f.table, "perspective table file replacing the built-in one");

  Command cmd = Command::Synth;
  app.add_subcommand("synth", "generate a labeled synthetic corpus")->fallthrough()->callback([&] {
    cmd = Command::Synth;
  });
  app.add_subcommand("train", "train with self-learning and write the run directory")->fallthrough()->callback([&] {
    cmd = Command::Train;
  });
  app.add_subcommand("infer", "predict every label of a corpus from a checkpoint")->fallthrough()->callback([&] {
    cmd = Command::Infer;
  });
  auto* eval = app.add_subcommand("eval", "score predictions against gold on the held-out authors");
  eval->fallthrough()->callback([&] { cmd = Command::Eval; });
  eval->add_option("--preds", f.preds, "preds.csv to score instead of running the checkpoint");
  eval->add_option("--baseline", f.baseline, "score the keyword baseline (keyword)");

  auto* analyze = app.add_subcommand("analyze", "discourse analyses over predicted or gold labels");
  analyze->fallthrough()->require_subcommand(1);
  analyze->add_option("--preds", f.preds, "preds.csv to analyze (default: gold labels)");
  analyze->add_option("--baseline", f.baseline, "analyze keyword baseline stances (keyword)");
  analyze->add_subcommand("pmi", "stance/perspective PMI")
      ->fallthrough()
      ->callback([&] { cmd = Command::Pmi; })
      ->add_option("--min-frac", f.min_frac, "drop perspectives below this share of occurrences");
  analyze->add_subcommand("trends", "daily stance and perspective shares")->fallthrough()->callback([&] {
    cmd = Command::Trends;
  });
  analyze->add_subcommand("correlation", "stance vs following and sharing behavior")->fallthrough()->callback([&] {
    cmd = Command::Correlation;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(cmd, f);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
