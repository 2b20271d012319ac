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

#include <filesystem>
#include <random>

#include <unistd.h>

#include <gtest/gtest.h>

#include "ime/errors.h"
#include "ime/eval.h"
#include "oracles.h"

namespace ime {
namespace {

CandidateList List(std::initializer_list<const char32_t*> texts) {
  CandidateList out;
  double score = 0.0;
  for (const char32_t* t : texts) out.push_back({t, score -= 1.0});
  return out;
}

TEST(PrecisionAtKTest, CountsHitsWithinCutoffs) {
  const int ks[] = {1, 2, 3};
  const auto c = List({U"甲", U"乙", U"丙"});
  EXPECT_EQ(PrecisionAtK(c, U"甲", ks), (std::vector<bool>{true, true, true}));
  EXPECT_EQ(PrecisionAtK(c, U"乙", ks), (std::vector<bool>{false, true, true}));
  EXPECT_EQ(PrecisionAtK(c, U"丁", ks), (std::vector<bool>{false, false, false}));
  EXPECT_EQ(RankOf(c, U"丙"), 3);
  EXPECT_EQ(RankOf(c, U"丁"), -1);
  EXPECT_THROW(PrecisionAtK(c, U"甲乙", ks), InvalidArgument);
}

std::vector<HitRecord> RandomHits(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> rank(-1, 12), bucket(0, 2), domain(0, 2);
  std::uniform_real_distribution<double> ms(0.1, 5.0);
  const char* domains[] = {"daily", "tech", "travel"};
  std::vector<HitRecord> hits;
  for (int i = 0; i < n; ++i) {
    int r = rank(rng);
    if (r == 0) r = -1;
    hits.push_back({std::to_string(i), domains[domain(rng)], ContextBucket(bucket(rng)),
                    TargetBucket(bucket(rng)), r, ms(rng), {}});
  }
  return hits;
}

TEST(AggregateTest, ReportInvariants) {
  const auto hits = RandomHits(3000, 1);
  const int ks[] = {1, 5, 10};
  const EvalReport r = Aggregate(hits, ks);
  EXPECT_EQ(r.cells.size(), 27u);
  EXPECT_EQ(r.configs.size(), 9u);
  EXPECT_EQ(r.domains.size(), 3u);
  EXPECT_EQ(r.overall.count, 3000);
  for (size_t i = 0; i < 3; ++i) {
    double weighted = 0.0;
    for (const auto& c : r.cells) {
      EXPECT_LE(c.precision[0], c.precision[1]);
      EXPECT_LE(c.precision[1], c.precision[2]);
      weighted += c.precision[i] * c.count;
    }
    EXPECT_NEAR(weighted / r.overall.count, r.overall.precision[i], 1e-12);
  }
  // Direct count of the oracle.
  long top5 = 0;
  for (const auto& h : hits) top5 += h.rank >= 1 && h.rank <= 5;
  EXPECT_NEAR(r.overall.precision[1], 100.0 * top5 / 3000, 1e-12);
  EXPECT_THROW(Aggregate(hits, std::vector<int>{5, 1}), InvalidArgument);
}

TEST(HitLogTest, ReplayReproducesTheReport) {
  const auto hits = RandomHits(500, 2);
  const auto path = std::filesystem::temp_directory_path() /
                    ("ime_hits_" + std::to_string(::getpid()) + ".jsonl");
  WriteHitLog(hits, path);
  const auto back = ReadHitLog(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), hits.size());
  const int ks[] = {1, 5, 10};
  EXPECT_EQ(ReportJson(Aggregate(back, ks)), ReportJson(Aggregate(hits, ks)));
}

TEST(EvaluateTest, EndToEndOnARandomModel) {
  const Lexicon& lex = testing::SmallLexicon();
  ModelConfig c;
  c.variant = Variant::kConcat;
  c.d_model = 16;
  c.n_heads = 2;
  c.d_ff = 32;
  c.n_layers = 1;
  const Model model(c, Vocabulary::Build(lex));
  const Decoder decoder(model, lex);
  std::vector<EvalInstance> instances;
  EvalInstance a;
  a.id = "a";
  a.domain = "d";
  a.context = U"我们";
  a.target = U"明天";
  a.pinyin_perfect = {"ming", "tian"};
  a.pinyin_abbrev = {"m", "t"};
  instances.push_back(a);
  EvalInstance b = a;
  b.id = "b";
  b.pinyin_perfect = {"ming", "qqq"};  // rejected, counts as a miss
  instances.push_back(b);
  const EvalOutput out = Evaluate(decoder, instances, {PinyinMode::kPerfect, 16, {1, 5, 10}});
  ASSERT_EQ(out.hits.size(), 2u);
  EXPECT_NE(out.hits[0].rank, 0);
  EXPECT_TRUE(out.hits[0].error.empty());
  EXPECT_EQ(out.hits[1].rank, -1);
  EXPECT_NE(out.hits[1].error.find("qqq"), std::string::npos);
  EXPECT_EQ(out.report.overall.count, 2);
  EXPECT_LE(out.report.overall.precision[2], 50.0);
  EXPECT_NE(ReportTable(out.report).find("P@5"), std::string::npos);
  EXPECT_THROW(Evaluate(decoder, instances, {PinyinMode::kPerfect, 5, {1, 5, 10}}),
               InvalidArgument);

  const Model* models[] = {&model};
  const auto rows = LatencyCompare(models, lex, instances, PinyinMode::kAbbreviated, 8);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GT(rows[0].mean_latency_ms, 0.0);
}

}  // namespace
}  // namespace ime
