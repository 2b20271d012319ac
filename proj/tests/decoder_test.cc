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

#include <random>

#include <gtest/gtest.h>

#include "ime/decoder.h"
#include "ime/errors.h"
#include "oracles.h"

namespace ime {
namespace {

ModelConfig TinyConfig(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.d_model = 8;
  c.n_heads = 2;
  c.d_ff = 16;
  c.n_layers = 2;
  c.max_positions = 32;
  return c;
}

std::vector<PinyinToken> Tokens(PinyinMode mode, std::initializer_list<const char*> v) {
  std::vector<PinyinToken> out;
  for (const char* s : v) out.push_back({mode, s});
  return out;
}

class DecoderTest : public ::testing::TestWithParam<Variant> {
 protected:
  Lexicon lex_ = testing::TinyLexicon();
};

TEST_P(DecoderTest, ExhaustiveBeamEqualsBruteForce) {
  Model model(TinyConfig(GetParam()), Vocabulary::Build(lex_));
  std::mt19937_64 rng(21);
  testing::RandomizeParams(model, rng, 0.5);
  const Decoder decoder(model, lex_);
  for (const auto& py : {Tokens(PinyinMode::kPerfect, {"shi", "ta", "xing"}),
                         Tokens(PinyinMode::kAbbreviated, {"h", "m", "sh"})}) {
    const auto oracle = testing::BruteForceDecode(model, lex_, U"我们", py);
    DecodeRequest req{U"我们", py, static_cast<int>(oracle.size()),
                      static_cast<int>(oracle.size())};
    const auto beam = decoder.BeamSearch(req);
    ASSERT_EQ(beam.size(), oracle.size());
    for (size_t i = 0; i < beam.size(); ++i) {
      EXPECT_EQ(beam[i].text, oracle[i].text) << "rank " << i;
      EXPECT_NEAR(beam[i].score, oracle[i].score, 1e-9);
    }
  }
}

TEST_P(DecoderTest, OutputIsSortedAndSound) {
  Model model(TinyConfig(GetParam()), Vocabulary::Build(lex_));
  std::mt19937_64 rng(8);
  testing::RandomizeParams(model, rng, 0.5);
  const Decoder decoder(model, lex_);
  const auto py = Tokens(PinyinMode::kAbbreviated, {"t", "m", "h", "sh", "n"});
  const auto out = decoder.BeamSearch({U"", py, 4, 3});
  ASSERT_EQ(out.size(), 3u);
  for (size_t i = 0; i < out.size(); ++i) {
    ASSERT_EQ(out[i].text.size(), py.size());
    for (size_t j = 0; j < py.size(); ++j) EXPECT_TRUE(lex_.Matches(out[i].text[j], py[j]));
    if (i > 0) EXPECT_GE(out[i - 1].score, out[i].score);
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, DecoderTest,
                         ::testing::Values(Variant::kBaseline, Variant::kConcat,
                                           Variant::kEmbed),
                         [](const auto& info) {
                           return std::string(VariantName(info.param));
                         });

// A zero model makes every hypothesis tie, so the order is pure text order.
TEST(DecoderTieTest, TiesAreBrokenByText) {
  const Lexicon lex = testing::TinyLexicon();
  Model model(TinyConfig(Variant::kConcat), Vocabulary::Build(lex));
  for (double& p : model.params()) p = 0.0;
  const Decoder decoder(model, lex);
  const auto out = decoder.BeamSearch({U"", Tokens(PinyinMode::kPerfect, {"shi", "ta"}), 6, 6});
  ASSERT_EQ(out.size(), 6u);
  std::vector<std::u32string> texts;
  for (const auto& c : out) {
    texts.push_back(c.text);
    EXPECT_DOUBLE_EQ(c.score, out[0].score);
  }
  EXPECT_TRUE(std::is_sorted(texts.begin(), texts.end()));
  EXPECT_NEAR(out[0].score, std::log(1.0 / 3) + std::log(1.0 / 2), 1e-12);
  // A narrow beam keeps the lexicographically first survivors.
  const auto narrow =
      decoder.BeamSearch({U"", Tokens(PinyinMode::kPerfect, {"shi", "ta"}), 2, 2});
  EXPECT_EQ(narrow[0].text, texts[0]);
  EXPECT_EQ(narrow[1].text, texts[1]);
}

TEST(DecoderValidationTest, RejectsBadRequests) {
  const Lexicon lex = testing::TinyLexicon();
  const Model model(TinyConfig(Variant::kConcat), Vocabulary::Build(lex));
  const Decoder decoder(model, lex);
  const auto py = Tokens(PinyinMode::kPerfect, {"wo"});
  EXPECT_THROW(decoder.BeamSearch({U"", {}, 4, 2}), InvalidArgument);
  EXPECT_THROW(decoder.BeamSearch({U"", py, 0, 1}), InvalidArgument);
  EXPECT_THROW(decoder.BeamSearch({U"", py, 2, 3}), InvalidArgument);
  EXPECT_THROW(decoder.BeamSearch({U"", py, 2, 0}), InvalidArgument);
  const std::vector<PinyinToken> mixed = {{PinyinMode::kPerfect, "wo"},
                                          {PinyinMode::kAbbreviated, "n"}};
  EXPECT_THROW(decoder.BeamSearch({U"", mixed, 2, 1}), InvalidArgument);
  EXPECT_THROW(decoder.BeamSearch({std::u32string(40, U'我'), py, 2, 1}), OverflowError);
}

TEST(DecoderValidationTest, ResolvePinyinNamesTheBadToken) {
  const Lexicon lex = testing::TinyLexicon();
  const Model model(TinyConfig(Variant::kBaseline), Vocabulary::Build(lex));
  const Decoder decoder(model, lex);
  const std::vector<std::string> raw = {"Ni", "HAO"};
  const auto tokens = decoder.ResolvePinyin(raw, PinyinMode::kPerfect);
  EXPECT_EQ(tokens[1].value, "hao");
  const std::vector<std::string> bad = {"ni", "hao", "qqq"};
  try {
    decoder.ResolvePinyin(bad, PinyinMode::kPerfect);
    ADD_FAILURE();
  } catch (const UnknownPinyinError& e) {
    EXPECT_EQ(e.token(), "qqq");
    EXPECT_EQ(e.position(), 2);
  }
  // A perfect syllable is not an abbreviation key.
  const std::vector<std::string> syllable = {"ni"};
  EXPECT_THROW(decoder.ResolvePinyin(syllable, PinyinMode::kAbbreviated), UnknownPinyinError);
  const auto out = decoder.Predict(U"", std::vector<std::string>{"n", "h"},
                                   PinyinMode::kAbbreviated, 4, 4);
  EXPECT_EQ(out.size(), 4u);
}

}  // namespace
}  // namespace ime
