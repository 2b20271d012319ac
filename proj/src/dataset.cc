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

#include "ime/dataset.h"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <utility>

#include "ime/errors.h"
#include "ime/utf8.h"
#include "json.hpp"

namespace ime {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::u32string_view kSentenceMarks = U"。！？；";

uint64_t Fnv1a(std::string_view text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Seed stream for one cell: independent of how domains are scheduled.
std::mt19937_64 CellRng(uint64_t seed, const std::string& domain,
                        ContextBucket cb, TargetBucket tb) {
  const uint64_t h = Fnv1a(domain);
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(h), static_cast<uint32_t>(h >> 32),
                    static_cast<uint32_t>(cb), static_cast<uint32_t>(tb)};
  return std::mt19937_64(seq);
}

std::vector<std::string> StringArray(const Json& value, const char* field,
                                     const std::string& source, size_t line_no) {
  if (!value.is_array()) {
    throw ParseError(source, line_no, std::string("field '") + field + "' must be an array");
  }
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw ParseError(source, line_no,
                       std::string("field '") + field + "' must hold strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::vector<DatasetCell> BuildDomain(const DomainCorpus& domain,
                                     const BuildSpec& spec,
                                     const Lexicon& lexicon) {
  std::vector<AnnotatedSentence> sentences;
  for (const auto& line : LoadCorpus(domain.path)) {
    for (auto& s : SplitSentences(line)) {
      sentences.push_back(AnnotateSentence(lexicon, std::move(s)));
    }
  }
  if (sentences.empty()) {
    throw InvalidArgument("domain '" + domain.name + "' has no sentences (" +
                          domain.path.string() + ")");
  }

  std::vector<DatasetCell> cells;
  for (ContextBucket cb : kContextBuckets) {
    for (TargetBucket tb : kTargetBuckets) {
      DatasetCell cell{domain.name, cb, tb, spec.instances_per_config, {}};
      std::mt19937_64 rng = CellRng(spec.seed, domain.name, cb, tb);

      // Only sentences that admit at least one (split, length) pair.
      std::vector<const AnnotatedSentence*> eligible;
      std::mt19937_64 probe(0);
      for (const auto& s : sentences) {
        if (SampleCase(s, cb, tb, probe)) eligible.push_back(&s);
      }
      std::set<std::pair<std::u32string, std::u32string>> seen;
      const long budget =
          static_cast<long>(spec.instances_per_config) * spec.attempts_per_instance;
      std::uniform_int_distribution<size_t> pick(
          0, eligible.empty() ? 0 : eligible.size() - 1);
      for (long attempt = 0;
           !eligible.empty() && attempt < budget &&
           static_cast<int>(cell.instances.size()) < spec.instances_per_config;
           ++attempt) {
        auto inst = SampleCase(*eligible[pick(rng)], cb, tb, rng);
        if (!seen.emplace(inst->context, inst->target).second) continue;
        inst->domain = domain.name;
        char id[32];
        std::snprintf(id, sizeof(id), "%05zu", cell.instances.size());
        inst->id = domain.name + "/" + std::string(Label(cb)) + "/" +
                   std::string(Label(tb)) + "/" + id;
        cell.instances.push_back(std::move(*inst));
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace

std::string_view Label(ContextBucket bucket) {
  switch (bucket) {
    case ContextBucket::k0To3: return "0-3";
    case ContextBucket::k4To9: return "4-9";
    case ContextBucket::k10Plus: return "10+";
  }
  return "?";
}

std::string_view Label(TargetBucket bucket) {
  switch (bucket) {
    case TargetBucket::k1To3: return "1-3";
    case TargetBucket::k4To9: return "4-9";
    case TargetBucket::k10Plus: return "10+";
  }
  return "?";
}

ContextBucket ParseContextBucket(std::string_view label) {
  for (ContextBucket b : kContextBuckets) {
    if (Label(b) == label) return b;
  }
  throw InvalidArgument("unknown context bucket '" + std::string(label) + "'");
}

TargetBucket ParseTargetBucket(std::string_view label) {
  for (TargetBucket b : kTargetBuckets) {
    if (Label(b) == label) return b;
  }
  throw InvalidArgument("unknown target bucket '" + std::string(label) + "'");
}

LengthRange SamplingRange(ContextBucket bucket) {
  switch (bucket) {
    case ContextBucket::k0To3: return {0, 3};
    case ContextBucket::k4To9: return {4, 9};
    case ContextBucket::k10Plus: return {10, kContextCap};
  }
  return {0, 0};
}

LengthRange SamplingRange(TargetBucket bucket) {
  switch (bucket) {
    case TargetBucket::k1To3: return {1, 3};
    case TargetBucket::k4To9: return {4, 9};
    case TargetBucket::k10Plus: return {10, kTargetCap};
  }
  return {0, 0};
}

ContextBucket ContextBucketOf(int length) {
  if (length < 0) throw InvalidArgument("negative context length");
  if (length <= 3) return ContextBucket::k0To3;
  if (length <= 9) return ContextBucket::k4To9;
  return ContextBucket::k10Plus;
}

TargetBucket TargetBucketOf(int length) {
  if (length < 1) throw InvalidArgument("target length must be at least 1");
  if (length <= 3) return TargetBucket::k1To3;
  if (length <= 9) return TargetBucket::k4To9;
  return TargetBucket::k10Plus;
}

std::vector<PinyinToken> EvalInstance::Pinyin(PinyinMode mode) const {
  const auto& values =
      mode == PinyinMode::kPerfect ? pinyin_perfect : pinyin_abbrev;
  std::vector<PinyinToken> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back({mode, v});
  return out;
}

std::string DatasetCell::FileName() const {
  return domain + "__ctx" + std::string(Label(context_bucket)) + "__tgt" +
         std::string(Label(target_bucket)) + ".jsonl";
}

std::vector<EvalInstance> Dataset::AllInstances() const {
  std::vector<EvalInstance> out;
  for (const auto& cell : cells) {
    out.insert(out.end(), cell.instances.begin(), cell.instances.end());
  }
  return out;
}

std::vector<std::u32string> SplitSentences(std::u32string_view text) {
  std::vector<std::u32string> out;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char32_t c : text) {
    if (c == U'\n' || c == U'\r') {
      flush();
      continue;
    }
    current.push_back(c);
    if (kSentenceMarks.find(c) != std::u32string_view::npos) flush();
  }
  flush();
  return out;
}

std::optional<EvalInstance> SampleCase(const AnnotatedSentence& sentence,
                                       ContextBucket cb, TargetBucket tb,
                                       std::mt19937_64& rng) {
  const int n = static_cast<int>(sentence.text.size());
  // run[i]: characters with pinyin starting at i.
  std::vector<int> run(n + 1, 0);
  for (int i = n - 1; i >= 0; --i) {
    run[i] = sentence.readings[i] ? run[i + 1] + 1 : 0;
  }
  const LengthRange cr = SamplingRange(cb);
  const LengthRange tr = SamplingRange(tb);
  std::vector<std::pair<int, int>> splits;  // (split, feasible length count)
  long total = 0;
  for (int s = cr.min; s <= std::min(cr.max, n - 1); ++s) {
    const int hi = std::min(tr.max, run[s]);
    if (hi < tr.min) continue;
    splits.emplace_back(s, hi - tr.min + 1);
    total += hi - tr.min + 1;
  }
  if (total == 0) return std::nullopt;

  long pick = std::uniform_int_distribution<long>(0, total - 1)(rng);
  int split = 0;
  int length = 0;
  for (const auto& [s, count] : splits) {
    if (pick < count) {
      split = s;
      length = tr.min + static_cast<int>(pick);
      break;
    }
    pick -= count;
  }

  EvalInstance inst;
  inst.context = sentence.text.substr(0, split);
  inst.target = sentence.text.substr(split, length);
  for (int i = split; i < split + length; ++i) {
    const PinyinSyllable& syl = *sentence.readings[i];
    inst.pinyin_perfect.push_back(syl.text);
    inst.pinyin_abbrev.push_back(
        Lexicon::TokenFor(syl, PinyinMode::kAbbreviated).value);
  }
  inst.context_bucket = cb;
  inst.target_bucket = tb;
  return inst;
}

std::optional<EvalInstance> SampleCase(std::u32string_view sentence,
                                       ContextBucket cb, TargetBucket tb,
                                       const Lexicon& lexicon,
                                       std::mt19937_64& rng) {
  return SampleCase(AnnotateSentence(lexicon, std::u32string(sentence)), cb,
                    tb, rng);
}

Dataset BuildDataset(const BuildSpec& spec, const Lexicon& lexicon) {
  if (spec.domains.empty()) throw InvalidArgument("no domains given");
  if (spec.instances_per_config < 1) {
    throw InvalidArgument("instances_per_config must be at least 1");
  }
  if (spec.attempts_per_instance < 1) {
    throw InvalidArgument("attempts_per_instance must be at least 1");
  }
  std::set<std::string> names;
  for (const auto& d : spec.domains) {
    if (d.name.empty()) throw InvalidArgument("domain name is empty");
    if (!names.insert(d.name).second) {
      throw InvalidArgument("duplicate domain '" + d.name + "'");
    }
  }

  std::vector<std::future<std::vector<DatasetCell>>> jobs;
  for (const auto& d : spec.domains) {
    jobs.push_back(std::async(std::launch::async, BuildDomain, std::cref(d),
                              std::cref(spec), std::cref(lexicon)));
  }
  Dataset dataset;
  dataset.seed = spec.seed;
  dataset.instances_per_config = spec.instances_per_config;
  for (auto& job : jobs) {
    for (auto& cell : job.get()) dataset.cells.push_back(std::move(cell));
  }
  return dataset;
}

std::string ToJsonLine(const EvalInstance& instance) {
  Json j;
  j["id"] = instance.id;
  j["domain"] = instance.domain;
  j["context"] = EncodeUtf8(instance.context);
  j["target"] = EncodeUtf8(instance.target);
  j["pinyin_perfect"] = instance.pinyin_perfect;
  j["pinyin_abbrev"] = instance.pinyin_abbrev;
  j["context_bucket"] = std::string(Label(instance.context_bucket));
  j["target_bucket"] = std::string(Label(instance.target_bucket));
  return j.dump();
}

EvalInstance ParseJsonLine(std::string_view line, const std::string& source,
                           size_t line_no) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(source, line_no, "expected a JSON object");
  auto text = [&](const char* field) -> std::string {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string()) {
      throw ParseError(source, line_no,
                       std::string("missing string field '") + field + "'");
    }
    return it->get<std::string>();
  };
  try {
    EvalInstance inst;
    inst.id = j.contains("id") ? text("id") : std::to_string(line_no);
    inst.domain = text("domain");
    inst.context = DecodeUtf8(text("context"));
    inst.target = DecodeUtf8(text("target"));
    if (!j.contains("pinyin_perfect") && !j.contains("pinyin_abbrev")) {
      throw ParseError(source, line_no, "no pinyin field");
    }
    if (j.contains("pinyin_perfect")) {
      inst.pinyin_perfect =
          StringArray(j["pinyin_perfect"], "pinyin_perfect", source, line_no);
    }
    if (j.contains("pinyin_abbrev")) {
      inst.pinyin_abbrev =
          StringArray(j["pinyin_abbrev"], "pinyin_abbrev", source, line_no);
    }
    for (const auto* p : {&inst.pinyin_perfect, &inst.pinyin_abbrev}) {
      if (!p->empty() && p->size() != inst.target.size()) {
        throw ParseError(source, line_no, "pinyin length differs from target length");
      }
    }
    inst.context_bucket = j.contains("context_bucket")
                              ? ParseContextBucket(text("context_bucket"))
                              : ContextBucketOf(static_cast<int>(inst.context.size()));
    inst.target_bucket = j.contains("target_bucket")
                             ? ParseTargetBucket(text("target_bucket"))
                             : TargetBucketOf(static_cast<int>(inst.target.size()));
    return inst;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(source, line_no, e.what());
  }
}

std::string ManifestJson(const Dataset& dataset) {
  Json j;
  j["seed"] = dataset.seed;
  j["instances_per_config"] = dataset.instances_per_config;
  Json cells = Json::array();
  size_t total = 0;
  for (const auto& cell : dataset.cells) {
    Json c;
    c["domain"] = cell.domain;
    c["context_bucket"] = std::string(Label(cell.context_bucket));
    c["target_bucket"] = std::string(Label(cell.target_bucket));
    c["file"] = cell.FileName();
    c["requested"] = cell.requested;
    c["count"] = cell.instances.size();
    c["shortfall"] = cell.requested - static_cast<int>(cell.instances.size());
    cells.push_back(std::move(c));
    total += cell.instances.size();
  }
  j["total"] = total;
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

void WriteDataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& cell : dataset.cells) {
    std::ofstream out(dir / cell.FileName(), std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / cell.FileName()).string());
    for (const auto& inst : cell.instances) out << ToJsonLine(inst) << '\n';
  }
  std::ofstream manifest(dir / "manifest.json", std::ios::binary);
  if (!manifest) throw Error("cannot write " + (dir / "manifest.json").string());
  manifest << ManifestJson(dataset);
}

std::vector<EvalInstance> LoadInstances(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    const auto manifest_path = path / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw ParseError(manifest_path.string(), 0, "cannot open manifest");
    Json manifest;
    try {
      manifest = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(manifest_path.string(), 0, e.what());
    }
    if (!manifest.contains("cells") || !manifest["cells"].is_array()) {
      throw ParseError(manifest_path.string(), 0, "manifest has no 'cells' array");
    }
    std::vector<EvalInstance> out;
    for (const auto& cell : manifest["cells"]) {
      if (!cell.contains("file") || !cell["file"].is_string()) {
        throw ParseError(manifest_path.string(), 0, "cell without 'file'");
      }
      auto part = LoadInstances(path / cell["file"].get<std::string>());
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    return out;
  }
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open instances");
  std::vector<EvalInstance> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(ParseJsonLine(line, path.string(), line_no));
  }
  return out;
}

std::vector<EvalInstance> LoadPd(const std::filesystem::path& path,
                                 const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open PD file");
  const std::string source = path.string();
  std::vector<EvalInstance> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    if (fields.size() != 2) {
      throw ParseError(source, line_no,
                       "expected 2 tab-separated fields (syllables, target), got " +
                           std::to_string(fields.size()));
    }
    std::vector<std::string> syllables;
    std::stringstream ws(fields[0]);
    for (std::string s; ws >> s;) syllables.push_back(s);
    std::u32string target;
    try {
      target = DecodeUtf8(fields[1]);
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (syllables.empty() || target.empty()) {
      throw ParseError(source, line_no, "empty syllables or target");
    }
    if (syllables.size() != target.size()) {
      throw ParseError(source, line_no,
                       std::to_string(syllables.size()) + " syllables for " +
                           std::to_string(target.size()) + " characters");
    }
    EvalInstance inst;
    for (size_t i = 0; i < syllables.size(); ++i) {
      const std::string& s = syllables[i];
      if (!lexicon.IsSyllable(s)) {
        throw ParseError(source, line_no, "unknown syllable '" + s + "'");
      }
      if (!lexicon.Matches(target[i], {PinyinMode::kPerfect, s})) {
        throw ParseError(source, line_no,
                         "character '" + EncodeUtf8(target[i]) +
                             "' has no reading '" + s + "'");
      }
      inst.pinyin_perfect.push_back(s);
      inst.pinyin_abbrev.push_back(lexicon.AbbreviationKey(s));
    }
    char id[32];
    std::snprintf(id, sizeof(id), "pd-%06zu", out.size());
    inst.id = id;
    inst.domain = "pd";
    inst.target = std::move(target);
    inst.context_bucket = ContextBucket::k0To3;
    inst.target_bucket = TargetBucketOf(static_cast<int>(inst.target.size()));
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace ime
