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

// pinyin-ime: command line front end for the library.

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ime/checkpoint.h"
#include "ime/dataset.h"
#include "ime/decoder.h"
#include "ime/errors.h"
#include "ime/eval.h"
#include "ime/lexicon.h"
#include "ime/model.h"
#include "ime/service.h"
#include "ime/training.h"
#include "ime/utf8.h"

namespace {

using namespace ime;

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<EvalInstance> Subsample(std::vector<EvalInstance> instances,
                                    int limit, uint64_t seed) {
  if (limit <= 0 || static_cast<size_t>(limit) >= instances.size()) return instances;
  std::mt19937_64 rng(seed);
  std::shuffle(instances.begin(), instances.end(), rng);
  instances.resize(limit);
  return instances;
}

// Flags shared by every subcommand.
struct Common {
  uint64_t seed = 0;
};

void AddCommon(CLI::App* sub, Common* common) {
  sub->set_config("--config", "", "TOML/INI file with option values");
  sub->add_option("--seed", common->seed, "Random seed");
}

struct BuildLexiconArgs {
  std::string input, output;
};

int RunBuildLexicon(const BuildLexiconArgs& a) {
  const Lexicon lexicon = Lexicon::Load(a.input);
  std::ofstream out(a.output, std::ios::binary);
  if (!out) throw Error("cannot write " + a.output);
  lexicon.Write(out);
  std::cerr << "characters " << lexicon.Characters().size() << "  rows "
            << lexicon.row_count() << "  syllables " << lexicon.Syllables().size()
            << "  keys " << lexicon.AbbreviationKeys().size() << "\n";
  return 0;
}

struct BuildDatasetArgs {
  std::string lexicon, out;
  std::vector<std::string> domains;  // name=path
  int per_config = 2000;
};

int RunBuildDataset(const BuildDatasetArgs& a, const Common& c) {
  const Lexicon lexicon = Lexicon::Load(a.lexicon);
  BuildSpec spec;
  spec.instances_per_config = a.per_config;
  spec.seed = c.seed;
  for (const auto& d : a.domains) {
    const auto eq = d.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == d.size()) {
      throw InvalidArgument("--domain expects name=path, got '" + d + "'");
    }
    spec.domains.push_back({d.substr(0, eq), d.substr(eq + 1)});
  }
  const Dataset dataset = BuildDataset(spec, lexicon);
  WriteDataset(dataset, a.out);
  for (const auto& cell : dataset.cells) {
    if (static_cast<int>(cell.instances.size()) < cell.requested) {
      std::cerr << "shortfall: " << cell.FileName() << " has "
                << cell.instances.size() << " of " << cell.requested << "\n";
    }
  }
  std::cerr << "wrote " << dataset.AllInstances().size() << " instances to "
            << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string corpus, lexicon, out, metrics, init, variant = "concat", modes = "perfect";
  ModelConfig model;
  TrainConfig train;
  bool no_pc_loss = false;
};

int RunTrain(TrainArgs a, const Common& c) {
  a.model.variant = ParseVariant(a.variant);
  a.model.seed = c.seed;
  a.train.seed = c.seed;
  a.train.modes = ParseTrainModes(a.modes);
  a.train.pc_loss = !a.no_pc_loss;
  const Lexicon lexicon = Lexicon::Load(a.lexicon);
  const auto corpus = LoadCorpus(a.corpus);
  std::optional<Model> init;
  if (!a.init.empty()) init.emplace(LoadModel(a.init));
  TrainResult result = Train(corpus, lexicon, a.model, a.train,
                             {a.metrics, a.out, init ? &*init : nullptr});
  std::cerr << "model " << result.model.id() << "  params "
            << result.model.param_count() << "  steps " << result.losses.size();
  if (!result.losses.empty()) std::cerr << "  final loss " << result.losses.back();
  std::cerr << "\n";
  return 0;
}

struct EvalArgs {
  std::string model, lexicon, data, pd, mode = "perfect", report, table, hits, replay;
  int beam = 16;
  int limit = 0;
  std::vector<int> ks = {1, 5, 10};
};

int RunEval(const EvalArgs& a, const Common& c) {
  EvalReport report;
  if (!a.replay.empty()) {
    const auto hits = ReadHitLog(a.replay);
    report = Aggregate(hits, a.ks);
    report.mode = a.mode;
    report.beam_size = a.beam;
  } else {
    if (a.model.empty() || a.lexicon.empty()) {
      throw InvalidArgument("eval needs --model and --lexicon (or --replay)");
    }
    if (a.data.empty() == a.pd.empty()) {
      throw InvalidArgument("give exactly one of --data and --pd");
    }
    const Lexicon lexicon = Lexicon::Load(a.lexicon);
    const Model model = LoadModel(a.model);
    auto instances = a.data.empty() ? LoadPd(a.pd, lexicon) : LoadInstances(a.data);
    instances = Subsample(std::move(instances), a.limit, c.seed);
    const Decoder decoder(model, lexicon);
    const EvalOutput out = Evaluate(decoder, instances, {ParseMode(a.mode), a.beam, a.ks});
    if (!a.hits.empty()) WriteHitLog(out.hits, a.hits);
    report = out.report;
  }
  if (!a.report.empty()) WriteText(a.report, ReportJson(report));
  if (a.table.empty() || a.table == "-") {
    std::cout << ReportTable(report);
  } else {
    WriteText(a.table, ReportTable(report));
  }
  return 0;
}

struct LatencyArgs {
  std::vector<std::string> models;
  std::string lexicon, data, mode = "perfect";
  int beam = 16;
  int limit = 200;
};

int RunLatency(const LatencyArgs& a, const Common& c) {
  const Lexicon lexicon = Lexicon::Load(a.lexicon);
  const auto instances = Subsample(LoadInstances(a.data), a.limit, c.seed);
  std::vector<Model> models;
  for (const auto& path : a.models) models.push_back(LoadModel(path));
  std::vector<const Model*> pointers;
  for (const auto& m : models) pointers.push_back(&m);
  const auto rows =
      LatencyCompare(pointers, lexicon, instances, ParseMode(a.mode), a.beam);
  std::cout << LatencyTable(rows);
  return 0;
}

struct PredictArgs {
  std::string model, lexicon, context, pinyin, mode = "perfect";
  int beam = 16;
  int top_k = 10;
};

int RunPredict(const PredictArgs& a) {
  const Lexicon lexicon = Lexicon::Load(a.lexicon);
  const Model model = LoadModel(a.model);
  std::vector<std::string> tokens;
  std::istringstream words(a.pinyin);
  for (std::string w; words >> w;) tokens.push_back(w);
  const Decoder decoder(model, lexicon);
  const auto candidates = decoder.Predict(DecodeUtf8(a.context), tokens,
                                          ParseMode(a.mode), a.beam, a.top_k);
  for (size_t i = 0; i < candidates.size(); ++i) {
    std::printf("%zu\t%s\t%.6f\n", i + 1, EncodeUtf8(candidates[i].text).c_str(),
                candidates[i].score);
  }
  return 0;
}

struct ServeArgs {
  std::string model, lexicon, log_level = "info";
  ServiceConfig service;
};

int RunServe(ServeArgs a) {
  a.service.log_level = ParseLogLevel(a.log_level);
  ApplyEnvironment(a.service);
  auto lexicon = std::make_shared<const Lexicon>(Lexicon::Load(a.lexicon));
  auto model = std::make_shared<const Model>(LoadModel(a.model));
  auto header = ReadCheckpointHeader(a.model);
  const PredictService service(model, lexicon, a.service, header.metadata);

  // Block the shutdown signals everywhere; one thread waits for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  HttpServer server(service, std::cerr);
  server.Bind();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.Stop();
  });
  server.Serve();
  // Serve() can also return on its own; wake the waiter so it can exit.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pinyin input method: lexicon, dataset, training, evaluation and serving"};
  app.require_subcommand(1);
  Common common;

  BuildLexiconArgs lex;
  auto* build_lexicon = app.add_subcommand("build-lexicon", "Validate and normalize a lexicon TSV");
  AddCommon(build_lexicon, &common);
  build_lexicon->add_option("--input", lex.input, "Lexicon TSV")->required()->check(CLI::ExistingFile);
  build_lexicon->add_option("--output", lex.output, "Normalized TSV")->required();

  BuildDatasetArgs ds;
  auto* build_dataset = app.add_subcommand("build-dataset", "Sample the evaluation dataset");
  AddCommon(build_dataset, &common);
  build_dataset->add_option("--lexicon", ds.lexicon)->required()->check(CLI::ExistingFile);
  build_dataset->add_option("--domain", ds.domains, "name=corpus path, repeatable")->required();
  build_dataset->add_option("--per-config", ds.per_config, "Instances per configuration");
  build_dataset->add_option("--out", ds.out, "Output directory")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  AddCommon(train, &common);
  train->add_option("--corpus", tr.corpus)->required()->check(CLI::ExistingFile);
  train->add_option("--lexicon", tr.lexicon)->required()->check(CLI::ExistingFile);
  train->add_option("--out", tr.out, "Checkpoint path")->required();
  train->add_option("--metrics", tr.metrics, "Per-step TSV log");
  train->add_option("--variant", tr.variant, "baseline, concat or embed");
  train->add_option("--layers", tr.model.n_layers);
  train->add_option("--d-model", tr.model.d_model);
  train->add_option("--heads", tr.model.n_heads);
  train->add_option("--d-ff", tr.model.d_ff);
  train->add_option("--max-positions", tr.model.max_positions);
  train->add_option("--dropout", tr.model.dropout);
  train->add_option("--lr", tr.train.learning_rate);
  train->add_option("--batch-tokens", tr.train.batch_size_tokens);
  train->add_option("--steps", tr.train.steps, "0 writes the initialized model");
  train->add_flag("--no-pc-loss", tr.no_pc_loss, "Normalize targets over the whole vocabulary");
  train->add_option("--modes", tr.modes, "perfect, abbrev or both");
  train->add_option("--short-prob", tr.train.short_target_prob);
  train->add_option("--warmup", tr.train.warmup_steps);
  train->add_option("--clip", tr.train.grad_clip, "Global gradient norm; 0 disables");
  train->add_option("--checkpoint-interval", tr.train.checkpoint_interval);
  train->add_option("--init", tr.init, "Warm-start from a checkpoint with the same shapes")
      ->check(CLI::ExistingFile);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score a model on a dataset");
  AddCommon(eval, &common);
  eval->add_option("--model", ev.model);
  eval->add_option("--lexicon", ev.lexicon);
  eval->add_option("--data", ev.data, "JSONL file or dataset directory");
  eval->add_option("--pd", ev.pd, "PD-format file");
  eval->add_option("--mode", ev.mode, "perfect or abbrev");
  eval->add_option("--beam", ev.beam);
  eval->add_option("--ks", ev.ks, "Cutoffs, increasing");
  eval->add_option("--limit", ev.limit, "Evaluate a seeded random subset");
  eval->add_option("--report", ev.report, "Report JSON path");
  eval->add_option("--table", ev.table, "Text table path (default stdout)");
  eval->add_option("--hits", ev.hits, "Hit log JSONL path");
  eval->add_option("--replay", ev.replay, "Rebuild the report from a hit log");

  LatencyArgs la;
  auto* latency = app.add_subcommand("latency", "Compare decoding latency across models");
  AddCommon(latency, &common);
  latency->add_option("--model", la.models, "Checkpoint, repeatable")->required();
  latency->add_option("--lexicon", la.lexicon)->required();
  latency->add_option("--data", la.data)->required();
  latency->add_option("--mode", la.mode);
  latency->add_option("--beam", la.beam);
  latency->add_option("--limit", la.limit);

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Decode one request");
  AddCommon(predict, &common);
  predict->add_option("--model", pr.model)->required();
  predict->add_option("--lexicon", pr.lexicon)->required();
  predict->add_option("--context", pr.context);
  predict->add_option("--pinyin", pr.pinyin, "Space-separated tokens")->required();
  predict->add_option("--mode", pr.mode);
  predict->add_option("--beam", pr.beam);
  predict->add_option("--top-k", pr.top_k);

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  AddCommon(serve, &common);
  serve->add_option("--model", sv.model)->required();
  serve->add_option("--lexicon", sv.lexicon)->required();
  serve->add_option("--host", sv.service.host);
  serve->add_option("--port", sv.service.port);
  serve->add_option("--beam", sv.service.default_beam_size);
  serve->add_option("--top-k", sv.service.default_top_k);
  serve->add_option("--cors-origin", sv.service.cors_origin);
  serve->add_option("--log-level", sv.log_level);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*build_lexicon) return RunBuildLexicon(lex);
    if (*build_dataset) return RunBuildDataset(ds, common);
    if (*train) return RunTrain(tr, common);
    if (*eval) return RunEval(ev, common);
    if (*latency) return RunLatency(la, common);
    if (*predict) return RunPredict(pr);
    if (*serve) return RunServe(sv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
