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

#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ime/errors.h"
#include "ime/lexicon.h"
#include "ime/utf8.h"
#include "oracles.h"

namespace ime {
namespace {

using testing::DataPath;
using testing::SmallLexicon;

Lexicon ParseText(const std::string& text) {
  std::istringstream in(text);
  return Lexicon::Parse(in, "inline");
}

TEST(Utf8Test, RoundTripsMixedText) {
  const std::string text = "a我ü😀。";
  const std::u32string decoded = DecodeUtf8(text);
  EXPECT_EQ(decoded, U"a我ü😀。");
  EXPECT_EQ(EncodeUtf8(decoded), text);
}

TEST(Utf8Test, RejectsMalformedInput) {
  EXPECT_THROW(DecodeUtf8("\xE6\x88"), InvalidArgument);  // truncated
  EXPECT_THROW(DecodeUtf8("\xFF"), InvalidArgument);
  EXPECT_THROW(DecodeUtf8("\x80"), InvalidArgument);
}

// Golden table: every standard syllable splits exactly as listed.
TEST(DecomposeTest, MatchesSyllableTable) {
  std::ifstream in(DataPath("lexicon/syllable_table.tsv"));
  ASSERT_TRUE(in);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string syllable, initial, final_part;
    std::getline(fields, syllable, '\t');
    std::getline(fields, initial, '\t');
    std::getline(fields, final_part, '\t');
    const auto [i, f] = Decompose(syllable);
    EXPECT_EQ(i, initial) << syllable;
    EXPECT_EQ(f, final_part) << syllable;
    EXPECT_EQ(i + f, syllable);
    ++rows;
  }
  EXPECT_GT(rows, 400);
}

TEST(DecomposeTest, LongestInitialWins) {
  EXPECT_EQ(Decompose("zhuang"), std::make_pair(std::string("zh"), std::string("uang")));
  EXPECT_EQ(Decompose("zuan"), std::make_pair(std::string("z"), std::string("uan")));
  EXPECT_EQ(Decompose("an"), std::make_pair(std::string(), std::string("an")));
  EXPECT_EQ(Decompose("er"), std::make_pair(std::string(), std::string("er")));
}

TEST(DecomposeTest, RejectsNonSyllables) {
  EXPECT_THROW(Decompose("zhx"), UnknownPinyinError);
  EXPECT_THROW(Decompose("b"), UnknownPinyinError);
  EXPECT_THROW(Decompose(""), UnknownPinyinError);
}

TEST(AbbreviationKeyTest, InitialOrFirstLetterOfFinal) {
  EXPECT_EQ(AbbreviationKey("zhong"), "zh");
  EXPECT_EQ(AbbreviationKey("shi"), "sh");
  EXPECT_EQ(AbbreviationKey("wo"), "w");
  EXPECT_EQ(AbbreviationKey("ai"), "a");
  EXPECT_EQ(AbbreviationKey("er"), "e");
}

TEST(LexiconTest, ParsesReadingsInPreferenceOrder) {
  const Lexicon lex = ParseText("# comment\n行\txing\t1\n行\thang\t1\n我\two\t2\n");
  ASSERT_EQ(lex.Readings(U'行').size(), 2u);
  EXPECT_EQ(lex.Readings(U'行')[0].text, "xing");
  EXPECT_EQ(lex.DefaultReading(U'行')->text, "xing");
  EXPECT_TRUE(lex.Readings(U'，').empty());
  EXPECT_FALSE(lex.DefaultReading(U'，').has_value());
  EXPECT_EQ(lex.row_count(), 3u);
  EXPECT_TRUE(lex.IsSyllable("hang"));
  EXPECT_TRUE(lex.IsAbbreviationKey("h"));
  EXPECT_FALSE(lex.IsAbbreviationKey("b"));
}

TEST(LexiconTest, ParseErrorsCarryLineNumbers) {
  const char* bad[] = {
      "我\two\t1\textra\n",  // too many fields
      "我们\two\n",           // not one character
      "我\tWo\n",             // not lowercase
      "我\two\tfirst\n",      // rank not an integer
      "我\two\n我\two\n",      // duplicate reading
      "我\twx\n",             // not decomposable
  };
  for (const char* text : bad) {
    try {
      ParseText(std::string("# header\n") + text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_GE(e.line(), 2u) << text;
    }
  }
  EXPECT_THROW(ParseText("# only comments\n"), ParseError);
}

TEST(LexiconTest, LegitimateCharsAndMatches) {
  const Lexicon lex = testing::TinyLexicon();
  const auto& shi = lex.LegitimateChars({PinyinMode::kPerfect, "shi"});
  EXPECT_EQ(std::u32string(shi.begin(), shi.end()), U"是十时");
  const auto& sh = lex.LegitimateChars({PinyinMode::kAbbreviated, "sh"});
  EXPECT_EQ(std::u32string(sh.begin(), sh.end()), U"是十时");
  const auto& h = lex.LegitimateChars({PinyinMode::kAbbreviated, "h"});
  EXPECT_EQ(std::u32string(h.begin(), h.end()), U"好号行");
  EXPECT_TRUE(lex.Matches(U'行', {PinyinMode::kPerfect, "hang"}));
  EXPECT_TRUE(lex.Matches(U'行', {PinyinMode::kAbbreviated, "x"}));
  EXPECT_FALSE(lex.Matches(U'我', {PinyinMode::kPerfect, "ni"}));
  try {
    lex.LegitimateChars({PinyinMode::kPerfect, "zhuang"});
    ADD_FAILURE();
  } catch (const UnknownPinyinError& e) {
    EXPECT_EQ(e.token(), "zhuang");
  }
}

// Properties over the whole fixture lexicon.
TEST(LexiconTest, ClassesArePartitionedConsistently) {
  const Lexicon& lex = SmallLexicon();
  for (const auto& syllable : lex.Syllables()) {
    const PinyinToken perfect{PinyinMode::kPerfect, syllable};
    const auto& chars = lex.LegitimateChars(perfect);
    ASSERT_FALSE(chars.empty()) << syllable;
    const std::string key = lex.AbbreviationKey(syllable);
    const PinyinToken abbrev{PinyinMode::kAbbreviated, key};
    const auto& wide = lex.LegitimateChars(abbrev);
    for (char32_t c : chars) {
      EXPECT_TRUE(lex.Matches(c, perfect));
      // Perfect classes are contained in the class of their key.
      EXPECT_NE(std::find(wide.begin(), wide.end(), c), wide.end());
    }
    const auto& expansion = lex.Expansion(key);
    EXPECT_NE(std::find(expansion.begin(), expansion.end(), syllable), expansion.end());
  }
  for (char32_t c : lex.Characters()) {
    for (const auto& r : lex.Readings(c)) {
      EXPECT_EQ(r.initial + r.final_part, r.text);
      EXPECT_TRUE(lex.Matches(c, Lexicon::TokenFor(r, PinyinMode::kAbbreviated)));
    }
  }
}

TEST(LexiconTest, WriteThenParseRoundTrips) {
  const Lexicon& lex = SmallLexicon();
  std::ostringstream out;
  lex.Write(out);
  const Lexicon again = ParseText(out.str());
  EXPECT_EQ(again.Characters(), lex.Characters());
  EXPECT_EQ(again.Syllables(), lex.Syllables());
  EXPECT_EQ(again.AbbreviationKeys(), lex.AbbreviationKeys());
  EXPECT_EQ(again.row_count(), lex.row_count());
}

TEST(LexiconTest, AnnotateUsesDefaultReading) {
  const Lexicon lex = testing::TinyLexicon();
  const auto a = lex.Annotate(U"行，我1");
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[0]->text, "xing");
  EXPECT_FALSE(a[1].has_value());
  EXPECT_EQ(a[2]->text, "wo");
  EXPECT_FALSE(a[3].has_value());
}

TEST(PinyinModeTest, NamesRoundTrip) {
  EXPECT_EQ(ParseMode(ModeName(PinyinMode::kPerfect)), PinyinMode::kPerfect);
  EXPECT_EQ(ParseMode(ModeName(PinyinMode::kAbbreviated)), PinyinMode::kAbbreviated);
  EXPECT_THROW(ParseMode("mixed"), InvalidArgument);
}

}  // namespace
}  // namespace ime
