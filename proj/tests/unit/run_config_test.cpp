#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "perspectra/error.hpp"
#include "perspectra/run_config.hpp"

namespace perspectra {
namespace {

TEST(RunConfig, SectionsAndCommentsParse) {
  RunConfig rc;
  rc.apply_text(
      "# comment\n"
      "[gen]\n"
      "n_authors = 40   \n"
      "mode = weak\n"
      "behavior_alignment = 0.5\n"
      "\n"
      "[train]\n"
      "k = 5\n"
      "author_thresholds = 1:8,30:2\n"
      "self_learning = false\n"
      "[paths]\n"
      "out = somewhere/else\n"
      "[run]\n"
      "seeds = 1000,2000\n");
  EXPECT_EQ(rc.experiment.gen.n_authors, 40u);
  EXPECT_EQ(rc.experiment.gen.mode, GenMode::WeakSupervision);
  EXPECT_EQ(rc.experiment.gen.behavior_alignment, 0.5);
  EXPECT_EQ(rc.experiment.train.k, 5u);
  EXPECT_EQ(rc.experiment.train.author_thresholds.size(), 2u);
  EXPECT_EQ(rc.experiment.train.author_threshold_at(31), 2u);
  EXPECT_FALSE(rc.experiment.train.self_learning);
  EXPECT_EQ(rc.out, std::filesystem::path("somewhere/else"));
  EXPECT_EQ(rc.seeds, (std::vector<std::uint64_t>{1000, 2000}));
}

TEST(RunConfig, UnknownKeysAndBadValuesAreRejected) {
  RunConfig rc;
  EXPECT_THROW(rc.set("train.nope", "1"), UsageError);
  EXPECT_THROW(rc.set("gen.n_authors", "-3"), UsageError);
  EXPECT_THROW(rc.set("gen.n_authors", "12x"), UsageError);
  EXPECT_THROW(rc.set("model.author_network", "maybe"), UsageError);
  EXPECT_THROW(rc.apply_text("[bogus]\nx = 1\n"), UsageError);
  EXPECT_THROW(rc.apply_text("k = 1\n"), UsageError);
  EXPECT_THROW(rc.apply_text("[train]\nk 1\n"), UsageError);
  EXPECT_THROW(rc.apply_text("[train\n"), UsageError);
  EXPECT_THROW(rc.apply_file("/nonexistent/config.txt"), UsageError);
}

TEST(RunConfig, CanonicalTextRoundTrips) {
  RunConfig rc;
  rc.set("gen.ambiguous_rate", "0.125");
  rc.set("model.lr", "0.001");
  rc.set("train.max_epochs", "77");
  rc.set("paths.corpus", "c.jsonl");
  const auto text = rc.to_text();
  RunConfig back;
  back.apply_text(text);
  EXPECT_EQ(back.to_text(), text);
  EXPECT_EQ(back.experiment.gen.ambiguous_rate, 0.125);
  EXPECT_EQ(back.experiment.model.lr, 0.001);
  EXPECT_EQ(back.experiment.train.max_epochs, 77u);
  EXPECT_EQ(back.corpus, std::filesystem::path("c.jsonl"));
  for (const auto& k : RunConfig::keys()) EXPECT_NE(text.find(k.substr(k.find('.') + 1) + " = "), std::string::npos) << k;

  testing::TempDir dir("cfg");
  {
    std::ofstream out(dir / "run.txt");
    out << text;
  }
  RunConfig from_file;
  from_file.apply_file(dir / "run.txt");
  EXPECT_EQ(from_file.to_text(), text);
}

TEST(RunConfig, DefaultsMatchTheReferenceSetup) {
  const RunConfig rc;
  EXPECT_EQ(rc.experiment.train_authors, 10u);
  EXPECT_EQ(rc.experiment.seed, 1000u);
  EXPECT_EQ(rc.experiment.train.k, 10u);
  EXPECT_EQ(rc.experiment.train.max_epochs, 300u);
  EXPECT_EQ(rc.experiment.model.d_in, 256u);
  EXPECT_EQ(rc.experiment.model.d_h1, 100u);
  EXPECT_EQ(rc.experiment.model.d_h2, 50u);
  EXPECT_EQ(rc.experiment.model.lr, 5e-4);
  EXPECT_EQ(rc.experiment.model.weight_decay, 0.01);
}

}  // namespace
}  // namespace perspectra
