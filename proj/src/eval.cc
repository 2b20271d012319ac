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

#include "ime/eval.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "ime/errors.h"
#include "ime/utf8.h"
#include "json.hpp"

namespace ime {
namespace {

using Json = nlohmann::ordered_json;

struct Accumulator {
  long count = 0;
  std::vector<long> hits;
  double latency_sum = 0.0;

  void Add(const HitRecord& h, std::span<const int> ks) {
    if (hits.empty()) hits.assign(ks.size(), 0);
    ++count;
    latency_sum += h.latency_ms;
    for (size_t i = 0; i < ks.size(); ++i) {
      if (h.rank >= 1 && h.rank <= ks[i]) ++hits[i];
    }
  }

  Score ToScore(std::string domain, std::string cb, std::string tb,
                size_t k_count) const {
    Score s{std::move(domain), std::move(cb), std::move(tb), count, {}, 0.0};
    s.precision.assign(k_count, 0.0);
    if (count > 0) {
      for (size_t i = 0; i < k_count; ++i) {
        s.precision[i] = 100.0 * static_cast<double>(hits[i]) / count;
      }
      s.mean_latency_ms = latency_sum / count;
    }
    return s;
  }
};

void CheckKs(std::span<const int> ks) {
  if (ks.empty()) throw InvalidArgument("ks must not be empty");
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) throw InvalidArgument("every k must be at least 1");
    if (i > 0 && ks[i] <= ks[i - 1]) {
      throw InvalidArgument("ks must be strictly increasing");
    }
  }
}

Json ScoreJson(const Score& s, std::span<const int> ks) {
  Json j;
  j["domain"] = s.domain;
  j["context_bucket"] = s.context_bucket;
  j["target_bucket"] = s.target_bucket;
  j["count"] = s.count;
  for (size_t i = 0; i < ks.size(); ++i) {
    j["p@" + std::to_string(ks[i])] = s.precision[i];
  }
  j["mean_latency_ms"] = s.mean_latency_ms;
  return j;
}

double Elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

int RankOf(const CandidateList& candidates, std::u32string_view truth) {
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].text == truth) return static_cast<int>(i) + 1;
  }
  return -1;
}

std::vector<bool> PrecisionAtK(const CandidateList& candidates,
                               std::u32string_view truth,
                               std::span<const int> ks) {
  for (const auto& c : candidates) {
    if (c.text.size() != truth.size()) {
      throw InvalidArgument("candidate length " + std::to_string(c.text.size()) +
                            " differs from reference length " +
                            std::to_string(truth.size()));
    }
  }
  const int rank = RankOf(candidates, truth);
  std::vector<bool> out;
  for (int k : ks) {
    if (k < 1) throw InvalidArgument("k must be at least 1");
    out.push_back(rank >= 1 && rank <= k);
  }
  return out;
}

EvalOutput Evaluate(const Decoder& decoder,
                    std::span<const EvalInstance> instances,
                    const EvalOptions& options) {
  CheckKs(options.ks);
  if (options.beam_size < options.ks.back()) {
    throw InvalidArgument("beam_size " + std::to_string(options.beam_size) +
                          " is smaller than the largest k " +
                          std::to_string(options.ks.back()));
  }
  EvalOutput out;
  out.hits.reserve(instances.size());
  for (const auto& inst : instances) {
    HitRecord hit{inst.id, inst.domain, inst.context_bucket, inst.target_bucket,
                  -1, 0.0, {}};
    const auto& raw = options.mode == PinyinMode::kPerfect ? inst.pinyin_perfect
                                                           : inst.pinyin_abbrev;
    const auto start = std::chrono::steady_clock::now();
    try {
      CandidateList cands =
          decoder.Predict(inst.context, raw, options.mode, options.beam_size,
                          options.ks.back());
      hit.latency_ms = Elapsed(start);
      hit.rank = RankOf(cands, inst.target);
    } catch (const Error& e) {
      // A rejected request counts as a miss; the reason goes to the log.
      hit.latency_ms = Elapsed(start);
      hit.error = e.what();
    }
    out.hits.push_back(std::move(hit));
  }
  out.report = Aggregate(out.hits, options.ks);
  out.report.model_id = decoder.model().id();
  out.report.mode = std::string(ModeName(options.mode));
  out.report.beam_size = options.beam_size;
  return out;
}

EvalReport Aggregate(std::span<const HitRecord> hits, std::span<const int> ks) {
  CheckKs(ks);
  std::vector<std::string> domain_order;
  std::map<std::string, size_t> domain_index;
  for (const auto& h : hits) {
    if (domain_index.emplace(h.domain, domain_order.size()).second) {
      domain_order.push_back(h.domain);
    }
  }
  std::map<std::tuple<size_t, int, int>, Accumulator> cells;
  std::map<std::pair<int, int>, Accumulator> configs;
  std::vector<Accumulator> domains(domain_order.size());
  Accumulator overall;
  for (const auto& h : hits) {
    const size_t d = domain_index[h.domain];
    const int cb = static_cast<int>(h.context_bucket);
    const int tb = static_cast<int>(h.target_bucket);
    cells[{d, cb, tb}].Add(h, ks);
    configs[{cb, tb}].Add(h, ks);
    domains[d].Add(h, ks);
    overall.Add(h, ks);
  }

  EvalReport report;
  report.ks.assign(ks.begin(), ks.end());
  for (const auto& [key, acc] : cells) {
    const auto [d, cb, tb] = key;
    report.cells.push_back(
        acc.ToScore(domain_order[d], std::string(Label(ContextBucket(cb))),
                    std::string(Label(TargetBucket(tb))), ks.size()));
  }
  for (const auto& [key, acc] : configs) {
    report.configs.push_back(
        acc.ToScore("*", std::string(Label(ContextBucket(key.first))),
                    std::string(Label(TargetBucket(key.second))), ks.size()));
  }
  for (size_t d = 0; d < domains.size(); ++d) {
    report.domains.push_back(domains[d].ToScore(domain_order[d], "*", "*", ks.size()));
  }
  report.overall = overall.ToScore("*", "*", "*", ks.size());
  return report;
}

std::string ReportJson(const EvalReport& report) {
  Json j;
  j["model_id"] = report.model_id;
  j["mode"] = report.mode;
  j["beam_size"] = report.beam_size;
  j["ks"] = report.ks;
  j["overall"] = ScoreJson(report.overall, report.ks);
  for (const char* name : {"domains", "configs", "cells"}) j[name] = Json::array();
  for (const auto& s : report.domains) j["domains"].push_back(ScoreJson(s, report.ks));
  for (const auto& s : report.configs) j["configs"].push_back(ScoreJson(s, report.ks));
  for (const auto& s : report.cells) j["cells"].push_back(ScoreJson(s, report.ks));
  return j.dump(2) + "\n";
}

std::string ReportTable(const EvalReport& report) {
  std::ostringstream out;
  out << "model " << report.model_id << "  mode " << report.mode << "  beam "
      << report.beam_size << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-12s %-7s %-7s %7s", "domain", "context",
                "target", "count");
  out << buf;
  for (int k : report.ks) {
    std::snprintf(buf, sizeof(buf), " %7s", ("P@" + std::to_string(k)).c_str());
    out << buf;
  }
  out << "  ms/inst\n";
  auto row = [&](const Score& s) {
    std::snprintf(buf, sizeof(buf), "%-12s %-7s %-7s %7ld", s.domain.c_str(),
                  s.context_bucket.c_str(), s.target_bucket.c_str(), s.count);
    out << buf;
    for (double p : s.precision) {
      std::snprintf(buf, sizeof(buf), " %7.2f", p);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "  %7.2f\n", s.mean_latency_ms);
    out << buf;
  };
  for (const auto& s : report.cells) row(s);
  for (const auto& s : report.configs) row(s);
  for (const auto& s : report.domains) row(s);
  row(report.overall);
  return out.str();
}

void WriteHitLog(std::span<const HitRecord> hits,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& h : hits) {
    Json j;
    j["id"] = h.id;
    j["domain"] = h.domain;
    j["context_bucket"] = std::string(Label(h.context_bucket));
    j["target_bucket"] = std::string(Label(h.target_bucket));
    j["rank"] = h.rank;
    j["latency_ms"] = h.latency_ms;
    if (!h.error.empty()) j["error"] = h.error;
    out << j.dump() << '\n';
  }
}

std::vector<HitRecord> ReadHitLog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open hit log");
  std::vector<HitRecord> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      HitRecord h;
      h.id = j.at("id").get<std::string>();
      h.domain = j.at("domain").get<std::string>();
      h.context_bucket = ParseContextBucket(j.at("context_bucket").get<std::string>());
      h.target_bucket = ParseTargetBucket(j.at("target_bucket").get<std::string>());
      h.rank = j.at("rank").get<int>();
      h.latency_ms = j.at("latency_ms").get<double>();
      if (j.contains("error")) h.error = j["error"].get<std::string>();
      out.push_back(std::move(h));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

std::vector<LatencyRow> LatencyCompare(std::span<const Model* const> models,
                                       const Lexicon& lexicon,
                                       std::span<const EvalInstance> instances,
                                       PinyinMode mode, int beam_size) {
  if (instances.empty()) throw InvalidArgument("no instances to time");
  std::vector<LatencyRow> rows;
  for (const Model* model : models) {
    Decoder decoder(*model, lexicon);
    EvalOptions options{mode, std::max(beam_size, 5), {5}};
    // One untimed decode so first-touch allocation does not skew the mean.
    Evaluate(decoder, instances.first(1), options);
    const EvalOutput out = Evaluate(decoder, instances, options);
    rows.push_back({model->id(), model->config().n_layers, out.report.overall.count,
                    out.report.overall.mean_latency_ms,
                    out.report.overall.precision[0]});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.n_layers < b.n_layers;
  });
  return rows;
}

std::string LatencyTable(std::span<const LatencyRow> rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-28s %7s %7s %10s %7s\n", "model", "layers",
                "count", "ms/inst", "P@5");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-28s %7d %7ld %10.3f %7.2f\n",
                  r.model_id.c_str(), r.n_layers, r.count, r.mean_latency_ms,
                  r.precision_at_5);
    out << buf;
  }
  return out.str();
}

}  // namespace ime
