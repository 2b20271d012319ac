// Copyright 2026 The pinyin-ime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "ime/checkpoint.h"
#include "ime/errors.h"
#include "ime/training.h"
#include "oracles.h"

namespace ime {
namespace {

TEST(ConstrainedLogProbTest, AgreesWithReference) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(30);
    for (double& v : logits) v = normal(rng);
    const std::vector<int> cls = {3, 7, 8, 21};
    for (int t : cls) {
      EXPECT_NEAR(ConstrainedLogProb(logits, t, cls),
                  testing::ReferenceLogProb(logits, t, cls), 1e-13);
    }
    EXPECT_NEAR(LogSoftmax(logits, 5), testing::ReferenceLogProb(logits, 5, {}), 1e-13);
  }
}

TEST(ConstrainedLogProbTest, RejectsTargetsOutsideTheClass) {
  const std::vector<double> logits = {0.0, 1.0, 2.0};
  const std::vector<int> cls = {0, 2};
  EXPECT_THROW(ConstrainedLogProb(logits, 1, cls), InvalidArgument);
  EXPECT_THROW(ConstrainedLogProb(logits, 1, {}), InvalidArgument);
}

TEST(ConstrainedLogProbTest, StableForHugeLogits) {
  const std::vector<double> logits = {1000.0, 999.0, -1000.0};
  const std::vector<int> cls = {0, 1};
  EXPECT_NEAR(ConstrainedLogProb(logits, 1, cls), -1.0 - std::log1p(std::exp(-1.0)), 1e-12);
}

// The target length law: short with probability p (uniform in its range),
// long otherwise, clamped to the longest pinyin run; start uniform.
TEST(SampleInstanceTest, LengthAndStartFollowTheSamplingLaw) {
  const Lexicon lex = testing::TinyLexicon();
  const AnnotatedSentence s = AnnotateSentence(lex, U"我们是你他好天明时门");
  TrainConfig cfg;
  cfg.short_target_prob = 0.5;
  cfg.short_range = {1, 4};
  cfg.long_range = {6, 25};
  std::mt19937_64 rng(2);
  const int n = 40000;
  std::map<int, int> lengths;
  std::map<int, int> starts_of_len3;
  for (int i = 0; i < n; ++i) {
    const auto inst = SampleInstance(s, cfg, PinyinMode::kPerfect, rng);
    ASSERT_TRUE(inst);
    ASSERT_EQ(inst->context + inst->target, s.text.substr(0, inst->context.size() + inst->target.size()));
    ++lengths[static_cast<int>(inst->target.size())];
    if (inst->target.size() == 3) ++starts_of_len3[static_cast<int>(inst->context.size())];
  }
  std::map<int, double> expected;
  for (int l = 1; l <= 4; ++l) expected[l] = 0.5 / 4;
  for (int l = 6; l <= 9; ++l) expected[l] = 0.5 / 20;
  expected[10] = 0.5 * 16 / 20;
  for (const auto& [l, p] : expected) {
    EXPECT_NEAR(lengths[l] / static_cast<double>(n), p, 0.01) << "length " << l;
  }
  EXPECT_EQ(lengths[5], 0);
  ASSERT_EQ(starts_of_len3.size(), 8u);
  for (const auto& [start, count] : starts_of_len3) {
    EXPECT_NEAR(count / static_cast<double>(lengths[3]), 1.0 / 8, 0.02) << start;
  }
}

TEST(SampleInstanceTest, TargetsAvoidCharactersWithoutPinyin) {
  const Lexicon lex = testing::TinyLexicon();
  const AnnotatedSentence s = AnnotateSentence(lex, U"我们，1你好。");
  TrainConfig cfg;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto inst = SampleInstance(s, cfg, PinyinMode::kAbbreviated, rng);
    ASSERT_TRUE(inst);
    EXPECT_LE(inst->target.size(), 2u);
    for (size_t j = 0; j < inst->target.size(); ++j) {
      EXPECT_TRUE(lex.Matches(inst->target[j], inst->pinyin[j]));
      EXPECT_EQ(inst->pinyin[j].mode, PinyinMode::kAbbreviated);
    }
  }
  EXPECT_FALSE(SampleInstance(AnnotateSentence(lex, U"，。"), cfg,
                              PinyinMode::kPerfect, rng));
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  AdamOptimizer adam(2, 0.9, 0.999, 1e-8);
  std::vector<double> p = {1.0, -1.0};
  const std::vector<double> g = {0.5, -2.0};
  adam.Step(p, g, 0.1);
  // Bias correction makes the first update lr * sign(g).
  EXPECT_NEAR(p[0], 0.9, 1e-7);
  EXPECT_NEAR(p[1], -0.9, 1e-7);
  adam.Step(p, g, 0.1);
  EXPECT_EQ(adam.steps(), 2);
}

TEST(MakeExampleTest, TrimsContextFromTheLeft) {
  const Lexicon lex = testing::TinyLexicon();
  ModelConfig c;
  c.variant = Variant::kConcat;
  c.d_model = 8;
  c.n_heads = 2;
  c.d_ff = 16;
  c.n_layers = 1;
  c.max_positions = 10;
  const Model model(c, Vocabulary::Build(lex));
  const Instance inst{U"我们是你他好", {{PinyinMode::kPerfect, "tian"}}, U"天"};
  const TrainingExample ex = MakeExample(model, lex, inst);
  EXPECT_EQ(ex.encoded.size(), 10u);
  // Kept context is the last five characters.
  EXPECT_EQ(ex.encoded.token_ids[1], model.vocab().CharId(U'们'));
  const Instance too_long{U"", std::vector<PinyinToken>(4, {PinyinMode::kPerfect, "wo"}),
                          U"我我我我"};
  EXPECT_THROW(MakeExample(model, lex, too_long), OverflowError);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.learning_rate = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = TrainConfig();
  c.short_range = {5, 2};
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = TrainConfig();
  c.short_target_prob = 1.5;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  EXPECT_EQ(ParseTrainModes("both"), TrainModes::kBoth);
  EXPECT_THROW(ParseTrainModes("neither"), InvalidArgument);
}

class TrainTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("ime_train_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::vector<std::u32string> corpus_ = {U"我们是你的他。", U"明天你好吗？",
                                         U"他们时时行。", U"她是十天名门。"};
  std::filesystem::path dir_;
};

TEST_F(TrainTest, LossDecreasesAndMetricsAreLogged) {
  const Lexicon lex = testing::TinyLexicon();
  ModelConfig mc;
  mc.variant = Variant::kConcat;
  mc.d_model = 16;
  mc.n_heads = 2;
  mc.d_ff = 32;
  mc.n_layers = 1;
  mc.max_positions = 32;
  TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.batch_size_tokens = 128;
  tc.steps = 60;
  tc.modes = TrainModes::kBoth;
  tc.seed = 4;
  const auto metrics = dir_ / "metrics.tsv";
  const auto ckpt = dir_ / "model.ckpt";
  const TrainResult r = Train(corpus_, lex, mc, tc, {metrics, ckpt});
  ASSERT_EQ(r.losses.size(), 60u);
  const double head = std::accumulate(r.losses.begin(), r.losses.begin() + 10, 0.0);
  const double tail = std::accumulate(r.losses.end() - 10, r.losses.end(), 0.0);
  EXPECT_LT(tail, 0.5 * head);

  std::ifstream in(metrics);
  std::string line;
  int rows = 0;
  long last_seen = 0;
  while (std::getline(in, line)) {
    std::istringstream f(line);
    int step;
    double loss, lr;
    long seen;
    ASSERT_TRUE(f >> step >> loss >> lr >> seen) << line;
    EXPECT_EQ(step, ++rows);
    EXPECT_NEAR(loss, r.losses[step - 1], 1e-8 * std::max(1.0, loss));
    EXPECT_GT(seen, last_seen);
    last_seen = seen;
  }
  EXPECT_EQ(rows, 60);
  EXPECT_EQ(last_seen, r.examples_seen);

  const CheckpointHeader header = ReadCheckpointHeader(ckpt);
  EXPECT_EQ(header.metadata.at("train_modes"), "both");
  EXPECT_EQ(header.metadata.at("steps"), "60");

  // Same seed, same run.
  const TrainResult again = Train(corpus_, lex, mc, tc);
  for (size_t i = 0; i < r.losses.size(); ++i) {
    ASSERT_EQ(again.losses[i], r.losses[i]) << "step " << i + 1;
  }
}

TEST_F(TrainTest, ZeroStepsWritesTheInitializedModel) {
  const Lexicon lex = testing::TinyLexicon();
  ModelConfig mc;
  mc.d_model = 8;
  mc.n_heads = 2;
  mc.d_ff = 16;
  mc.n_layers = 1;
  TrainConfig tc;
  tc.steps = 0;
  const auto ckpt = dir_ / "init.ckpt";
  const TrainResult r = Train(corpus_, lex, mc, tc, {{}, ckpt});
  EXPECT_TRUE(r.losses.empty());
  const Model loaded = LoadModel(ckpt);
  EXPECT_TRUE(std::equal(loaded.params().begin(), loaded.params().end(),
                         Model(r.model.config(), r.model.vocab()).params().begin()));
}

TEST_F(TrainTest, WarmStartCopiesSharedTensors) {
  const Lexicon lex = testing::TinyLexicon();
  ModelConfig mc;
  mc.d_model = 8;
  mc.n_heads = 2;
  mc.d_ff = 16;
  mc.n_layers = 1;
  mc.max_positions = 32;
  TrainConfig tc;
  tc.learning_rate = 1e-2;
  tc.batch_size_tokens = 64;
  tc.steps = 5;
  const Model base = Train(corpus_, lex, mc, tc).model;

  ModelConfig cc = mc;
  cc.variant = Variant::kConcat;
  cc.seed = 9;
  tc.steps = 0;
  const auto ckpt = dir_ / "warm.ckpt";
  const Model warm = Train(corpus_, lex, cc, tc, {{}, ckpt, &base}).model;
  const Model cold(warm.config(), warm.vocab());
  const int shared_rows = base.vocab().char_count() + 2;
  for (const TensorSpec& t : warm.tensors()) {
    const auto w = warm.view(t);
    if (t.name == "tok_emb") {
      const auto b = base.view(base.tensor("tok_emb"));
      EXPECT_EQ(w.topRows(shared_rows), b) << "character rows";
      EXPECT_EQ(w.bottomRows(t.rows - shared_rows),
                cold.view(t).bottomRows(t.rows - shared_rows))
          << "pinyin rows keep their initialization";
    } else {
      EXPECT_EQ(w, base.view(base.tensor(t.name))) << t.name;
    }
  }
  EXPECT_EQ(ReadCheckpointHeader(ckpt).metadata.at("init"), base.id());

  ModelConfig wide = cc;
  wide.d_model = 16;
  EXPECT_THROW(Train(corpus_, lex, wide, tc, {{}, {}, &base}), InvalidArgument);
}

}  // namespace
}  // namespace ime
