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

#ifndef IME_DATASET_H_
#define IME_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ime/lexicon.h"
#include "ime/training.h"

namespace ime {

// Length buckets are counted in characters. The open-ended buckets are
// capped (context 30, target 25) when sampling.
enum class ContextBucket { k0To3, k4To9, k10Plus };
enum class TargetBucket { k1To3, k4To9, k10Plus };

inline constexpr ContextBucket kContextBuckets[] = {
    ContextBucket::k0To3, ContextBucket::k4To9, ContextBucket::k10Plus};
inline constexpr TargetBucket kTargetBuckets[] = {
    TargetBucket::k1To3, TargetBucket::k4To9, TargetBucket::k10Plus};

inline constexpr int kContextCap = 30;
inline constexpr int kTargetCap = 25;

struct LengthRange {
  int min;
  int max;
  bool Contains(int n) const { return n >= min && n <= max; }
};

std::string_view Label(ContextBucket bucket);  // "0-3", "4-9", "10+"
std::string_view Label(TargetBucket bucket);   // "1-3", "4-9", "10+"
ContextBucket ParseContextBucket(std::string_view label);
TargetBucket ParseTargetBucket(std::string_view label);
LengthRange SamplingRange(ContextBucket bucket);
LengthRange SamplingRange(TargetBucket bucket);
// Uncapped membership: 10+ accepts any length of ten or more.
ContextBucket ContextBucketOf(int length);
TargetBucket TargetBucketOf(int length);

struct EvalInstance {
  std::string id;
  std::string domain;
  std::u32string context;
  std::u32string target;
  std::vector<std::string> pinyin_perfect;
  std::vector<std::string> pinyin_abbrev;
  ContextBucket context_bucket = ContextBucket::k0To3;
  TargetBucket target_bucket = TargetBucket::k1To3;

  std::vector<PinyinToken> Pinyin(PinyinMode mode) const;
};

struct DomainCorpus {
  std::string name;
  std::filesystem::path path;
};

struct BuildSpec {
  std::vector<DomainCorpus> domains;
  int instances_per_config = 2000;
  uint64_t seed = 0;
  // Sampling attempts per requested instance before a cell gives up.
  int attempts_per_instance = 50;
};

struct DatasetCell {
  std::string domain;
  ContextBucket context_bucket;
  TargetBucket target_bucket;
  int requested = 0;
  std::vector<EvalInstance> instances;

  std::string FileName() const;  // <domain>__ctx<label>__tgt<label>.jsonl
};

struct Dataset {
  uint64_t seed = 0;
  int instances_per_config = 0;
  std::vector<DatasetCell> cells;  // domain order, then context, then target

  std::vector<EvalInstance> AllInstances() const;
};

// Splits after each sentence-final mark (。！？；) and at line breaks; the
// mark stays with its sentence. Empty pieces are dropped.
std::vector<std::u32string> SplitSentences(std::u32string_view text);

// Picks (split, length) uniformly among pairs where the context length is
// in `cb`, the target length is in `tb`, the target fits in the sentence and
// every target character has pinyin. nullopt when no pair is feasible.
std::optional<EvalInstance> SampleCase(const AnnotatedSentence& sentence,
                                       ContextBucket cb, TargetBucket tb,
                                       std::mt19937_64& rng);
std::optional<EvalInstance> SampleCase(std::u32string_view sentence,
                                       ContextBucket cb, TargetBucket tb,
                                       const Lexicon& lexicon,
                                       std::mt19937_64& rng);

// Nine cells per domain, each with up to instances_per_config instances,
// no repeated (context, target) pair inside a cell. Domains are built
// concurrently; every cell has its own seed stream, so the output does not
// depend on scheduling. Throws InvalidArgument naming an empty domain.
Dataset BuildDataset(const BuildSpec& spec, const Lexicon& lexicon);

// One JSONL file per cell plus manifest.json.
void WriteDataset(const Dataset& dataset, const std::filesystem::path& dir);
std::string ManifestJson(const Dataset& dataset);

std::string ToJsonLine(const EvalInstance& instance);
EvalInstance ParseJsonLine(std::string_view line, const std::string& source,
                           size_t line_no);

// A .jsonl file, or a directory written by WriteDataset (read through its
// manifest, in manifest order).
std::vector<EvalInstance> LoadInstances(const std::filesystem::path& path);

// `<space-separated perfect syllables>\t<target characters>` per line:
// empty context, perfect pinyin only.
std::vector<EvalInstance> LoadPd(const std::filesystem::path& path,
                                 const Lexicon& lexicon);

}  // namespace ime

#endif  // IME_DATASET_H_
