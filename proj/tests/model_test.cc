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
#include <random>

#include <gtest/gtest.h>

#include "ime/encoding.h"
#include "ime/errors.h"
#include "ime/model.h"
#include "ime/transformer.h"
#include "oracles.h"

namespace ime {
namespace {

ModelConfig SmallConfig(Variant variant, int d_model, int layers) {
  ModelConfig c;
  c.variant = variant;
  c.d_model = d_model;
  c.n_heads = 2;
  c.d_ff = 4 * d_model;
  c.n_layers = layers;
  c.max_positions = 48;
  return c;
}

std::vector<PinyinToken> Tokens(PinyinMode mode, std::initializer_list<const char*> v) {
  std::vector<PinyinToken> out;
  for (const char* s : v) out.push_back({mode, s});
  return out;
}

class ModelTest : public ::testing::TestWithParam<Variant> {
 protected:
  Lexicon lex_ = testing::TinyLexicon();
  Vocabulary vocab_ = Vocabulary::Build(lex_, U"，");
};

TEST_P(ModelTest, ForwardMatchesReference) {
  Model model(SmallConfig(GetParam(), 4, 2), vocab_);
  std::mt19937_64 rng(11);
  testing::RandomizeParams(model, rng, 0.5);
  const auto py = Tokens(PinyinMode::kPerfect, {"shi", "ta", "ming"});
  const auto input = EncodeExample(model, lex_, U"我，你们", py, U"是他明");
  const Matrix fast = Forward(model, input);
  const auto slow = testing::ReferenceForward(model, input);
  ASSERT_EQ(fast.rows(), static_cast<Eigen::Index>(slow.size()));
  double worst = 0.0;
  for (Eigen::Index t = 0; t < fast.rows(); ++t) {
    for (Eigen::Index c = 0; c < fast.cols(); ++c) {
      worst = std::max(worst, std::abs(fast(t, c) - slow[t][c]));
    }
  }
  EXPECT_LT(worst, 1e-10);
}

TEST_P(ModelTest, CachedDecodingMatchesFullForward) {
  Model model(SmallConfig(GetParam(), 8, 2), vocab_);
  std::mt19937_64 rng(5);
  testing::RandomizeParams(model, rng, 0.3);
  const auto py = Tokens(PinyinMode::kAbbreviated, {"sh", "t"});
  const std::u32string target = U"是她";
  const auto full = EncodeExample(model, lex_, U"我们", py, target);
  const Matrix hidden = ForwardHidden(model, full);
  const auto prefix = EncodeExample(model, lex_, U"我们", py, U"");
  KvCache cache;
  RowVector h = Prefill(model, prefix, &cache);
  const size_t start = prefix.size();
  EXPECT_LT((h - hidden.row(start - 1)).cwiseAbs().maxCoeff(), 1e-12);
  for (size_t t = start; t < full.size(); ++t) {
    const int pin = full.pinyin_ids.empty() ? 0 : full.pinyin_ids[t];
    h = Extend(model, &cache, full.token_ids[t], full.position_ids[t], pin);
    EXPECT_LT((h - hidden.row(t)).cwiseAbs().maxCoeff(), 1e-12) << t;
  }
}

TEST_P(ModelTest, AttentionIsCausal) {
  Model model(SmallConfig(GetParam(), 8, 1), vocab_);
  std::mt19937_64 rng(9);
  testing::RandomizeParams(model, rng, 0.3);
  const auto py = Tokens(PinyinMode::kPerfect, {"ni", "hao"});
  const auto a = EncodeExample(model, lex_, U"我", py, U"你好");
  const auto b = EncodeExample(model, lex_, U"我", py, U"你号");
  const Matrix ha = ForwardHidden(model, a);
  const Matrix hb = ForwardHidden(model, b);
  const Eigen::Index last = ha.rows() - 1;
  EXPECT_EQ(ha.topRows(last), hb.topRows(last));
  EXPECT_NE(ha.row(last), hb.row(last));
}

INSTANTIATE_TEST_SUITE_P(Variants, ModelTest,
                         ::testing::Values(Variant::kBaseline, Variant::kConcat,
                                           Variant::kEmbed),
                         [](const auto& info) {
                           return std::string(VariantName(info.param));
                         });

TEST(ModelLayoutTest, TensorsTileTheParameterVector) {
  const Lexicon lex = testing::TinyLexicon();
  for (Variant v : {Variant::kBaseline, Variant::kConcat, Variant::kEmbed}) {
    Model model(SmallConfig(v, 8, 2), Vocabulary::Build(lex));
    size_t offset = 0;
    for (const auto& t : model.tensors()) {
      EXPECT_EQ(t.offset, offset) << t.name;
      offset += t.size();
    }
    EXPECT_EQ(offset, model.param_count());
    EXPECT_EQ(model.tensor("h1.qkv_w").cols, 24);
    EXPECT_EQ(model.tensor("head_w").rows, model.vocab().char_count());
    const bool has_pin = v == Variant::kEmbed;
    bool found = false;
    for (const auto& t : model.tensors()) found |= t.name == "pin_emb";
    EXPECT_EQ(found, has_pin);
    // Concat reserves input rows for pinyin tokens.
    EXPECT_EQ(model.tensor("tok_emb").rows,
              model.vocab().input_size(v == Variant::kConcat));
  }
}

TEST(ModelLayoutTest, InitializationStatistics) {
  ModelConfig c = SmallConfig(Variant::kConcat, 64, 2);
  c.seed = 3;
  const Model model(c, Vocabulary::Build(testing::SmallLexicon()));
  const auto w = model.view(model.tensor("tok_emb"));
  const double mean = w.mean();
  const double sd = std::sqrt((w.array() - mean).square().mean());
  EXPECT_NEAR(mean, 0.0, 1e-3);
  EXPECT_NEAR(sd, 0.02, 1e-3);
  EXPECT_EQ(model.view(model.tensor("h0.ln1_g")).minCoeff(), 1.0);
  EXPECT_EQ(model.view(model.tensor("h0.qkv_b")).cwiseAbs().maxCoeff(), 0.0);
  // Same seed, same weights.
  const Model again(c, model.vocab());
  EXPECT_TRUE(std::equal(model.params().begin(), model.params().end(),
                         again.params().begin()));
}

TEST(ModelConfigTest, ValidateRejectsBadShapes) {
  ModelConfig c = SmallConfig(Variant::kBaseline, 8, 1);
  EXPECT_NO_THROW(c.Validate());
  c.n_heads = 3;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = SmallConfig(Variant::kBaseline, 8, 0);
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = SmallConfig(Variant::kBaseline, 8, 1);
  c.dropout = 1.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  EXPECT_EQ(ParseVariant("embed"), Variant::kEmbed);
  EXPECT_THROW(ParseVariant("bert"), InvalidArgument);
}

}  // namespace
}  // namespace ime
