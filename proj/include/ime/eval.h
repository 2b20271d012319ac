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

#ifndef IME_EVAL_H_
#define IME_EVAL_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ime/dataset.h"
#include "ime/decoder.h"
#include "ime/lexicon.h"
#include "ime/model.h"

namespace ime {

inline constexpr int kDefaultKs[] = {1, 5, 10};

// 1-based rank of `truth` among the candidates, or -1.
int RankOf(const CandidateList& candidates, std::u32string_view truth);

// hit[i] is true when truth appears within the first ks[i] candidates.
std::vector<bool> PrecisionAtK(const CandidateList& candidates,
                               std::u32string_view truth,
                               std::span<const int> ks);

// Per-instance outcome, one line of the hit log.
struct HitRecord {
  std::string id;
  std::string domain;
  ContextBucket context_bucket = ContextBucket::k0To3;
  TargetBucket target_bucket = TargetBucket::k1To3;
  int rank = -1;
  double latency_ms = 0.0;
  std::string error;  // non-empty when decoding was rejected
};

struct Score {
  std::string domain;  // "*" across domains
  std::string context_bucket;  // label, or "*"
  std::string target_bucket;   // label, or "*"
  long count = 0;
  std::vector<double> precision;  // percent, parallel to the report's ks
  double mean_latency_ms = 0.0;
};

struct EvalReport {
  std::string model_id;
  std::string mode;
  int beam_size = 0;
  std::vector<int> ks;
  std::vector<Score> cells;    // (domain, context, target)
  std::vector<Score> configs;  // (context, target) over all domains
  std::vector<Score> domains;  // domain over all configs
  Score overall;
};

struct EvalOptions {
  PinyinMode mode = PinyinMode::kPerfect;
  int beam_size = 16;
  std::vector<int> ks = {1, 5, 10};
};

struct EvalOutput {
  EvalReport report;
  std::vector<HitRecord> hits;
};

// Decodes every instance and aggregates. Throws InvalidArgument when
// beam_size < max(ks) or ks is empty or unsorted.
EvalOutput Evaluate(const Decoder& decoder,
                    std::span<const EvalInstance> instances,
                    const EvalOptions& options);

// Pure aggregation of hit records; scores are instance-weighted, so every
// aggregate equals the count-weighted mean of the cells it covers.
EvalReport Aggregate(std::span<const HitRecord> hits, std::span<const int> ks);

std::string ReportJson(const EvalReport& report);
std::string ReportTable(const EvalReport& report);

void WriteHitLog(std::span<const HitRecord> hits,
                 const std::filesystem::path& path);
std::vector<HitRecord> ReadHitLog(const std::filesystem::path& path);

struct LatencyRow {
  std::string model_id;
  int n_layers = 0;
  long count = 0;
  double mean_latency_ms = 0.0;
  double precision_at_5 = 0.0;  // percent
};

// Runs the models one after another over the same instances. Rows are
// sorted by layer count.
std::vector<LatencyRow> LatencyCompare(std::span<const Model* const> models,
                                       const Lexicon& lexicon,
                                       std::span<const EvalInstance> instances,
                                       PinyinMode mode, int beam_size);
std::string LatencyTable(std::span<const LatencyRow> rows);

}  // namespace ime

#endif  // IME_EVAL_H_
