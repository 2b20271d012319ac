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

#ifndef IME_TRAINING_H_
#define IME_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ime/lexicon.h"
#include "ime/model.h"
#include "ime/vocabulary.h"

namespace ime {

// Which pinyin modes a run trains on. kBoth picks one mode per example, so
// every example stays single-mode.
enum class TrainModes { kPerfect, kAbbreviated, kBoth };

std::string_view TrainModesName(TrainModes modes);
TrainModes ParseTrainModes(std::string_view name);

struct TrainConfig {
  double learning_rate = 5e-5;
  int batch_size_tokens = 1024;
  int steps = 1000;
  bool pc_loss = true;
  double short_target_prob = 0.5;
  // Inclusive character-count ranges for sampled targets.
  std::pair<int, int> short_range{1, 4};
  std::pair<int, int> long_range{6, 25};
  TrainModes modes = TrainModes::kPerfect;
  int warmup_steps = 0;  // linear warmup; 0 disables
  double grad_clip = 1.0;  // global L2 norm; 0 disables
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int checkpoint_interval = 0;  // steps; 0 writes only the final checkpoint
  uint64_t seed = 0;

  void Validate() const;
};

struct AnnotatedSentence {
  std::u32string text;
  std::vector<std::optional<PinyinSyllable>> readings;
};

AnnotatedSentence AnnotateSentence(const Lexicon& lexicon, std::u32string text);

// A (context, pinyin, target) triple; |pinyin| == |target|.
struct Instance {
  std::u32string context;
  std::vector<PinyinToken> pinyin;
  std::u32string target;
};

// Draws a target run of characters that all have pinyin. Length comes from
// short_range with probability short_target_prob, else from long_range,
// clamped to the longest run; the start is uniform over placements of that
// length. The context is everything before the target. Returns nullopt when
// the sentence has no character with pinyin.
std::optional<Instance> SampleInstance(const AnnotatedSentence& sentence,
                                       const TrainConfig& config,
                                       PinyinMode mode, std::mt19937_64& rng);

// log p(target) under a softmax restricted to `class_ids`.
// Throws InvalidArgument if target is not in the class or the class is empty.
double ConstrainedLogProb(std::span<const double> logits, int target,
                          std::span<const int> class_ids);
// Whole-vocabulary log-softmax.
double LogSoftmax(std::span<const double> logits, int target);

struct TrainingExample {
  EncodedInput encoded;
  PinyinMode mode = PinyinMode::kPerfect;
  Variant variant = Variant::kBaseline;
};

// Encodes `instance` for the model's variant; trims the context from the
// left when the layout would not fit in max_positions.
TrainingExample MakeExample(const Model& model, const Lexicon& lexicon,
                            const Instance& instance);

struct LossResult {
  double loss = 0.0;  // mean negative log-likelihood over masked positions
  int positions = 0;
};

// With `pc_loss`, positions carrying a class id are normalized over that
// class only; others use the whole vocabulary. Gradients are accumulated
// into `grads` when it is non-empty. Throws Error on a non-finite loss.
LossResult ComputeLoss(const Model& model,
                       std::span<const TrainingExample> batch,
                       const ClassTable& classes, bool pc_loss,
                       std::span<double> grads = {},
                       std::mt19937_64* dropout_rng = nullptr);

class AdamOptimizer {
 public:
  AdamOptimizer(size_t size, double beta1, double beta2, double eps);
  void Step(std::span<double> params, std::span<const double> grads,
            double learning_rate);
  int steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<double> m_, v_;
};

// One sentence per non-empty line, UTF-8.
std::vector<std::u32string> LoadCorpus(const std::filesystem::path& path);

struct TrainOptions {
  std::filesystem::path metrics_path;     // `step\tloss\tlr\texamples_seen`
  std::filesystem::path checkpoint_path;  // written at the end and every
                                          // checkpoint_interval steps
  const Model* init = nullptr;            // warm start, see WarmStart
};

// Copies the parameters of `source` into `target` tensor by tensor, so a
// pinyin model can continue from a trained baseline. Layer shapes and the
// vocabulary must agree. Embedding rows are copied for the ids both inputs
// share (characters, BOS, SEP and positions); pinyin rows and tensors that
// `source` lacks keep their initialization. Throws InvalidArgument otherwise.
void WarmStart(Model& target, const Model& source);

struct TrainResult {
  Model model;
  std::vector<double> losses;  // one per step
  long examples_seen = 0;
};

// The vocabulary is the lexicon plus every other symbol in the corpus.
TrainResult Train(const std::vector<std::u32string>& corpus,
                  const Lexicon& lexicon, const ModelConfig& model_config,
                  const TrainConfig& config, const TrainOptions& options = {});

}  // namespace ime

#endif  // IME_TRAINING_H_
