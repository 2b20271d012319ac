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

#include "ime/training.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "ime/checkpoint.h"
#include "ime/encoding.h"
#include "ime/errors.h"
#include "ime/transformer.h"
#include "ime/utf8.h"

namespace ime {
namespace {

struct Run {
  size_t start;
  size_t length;
};

std::vector<Run> PinyinRuns(const AnnotatedSentence& s) {
  std::vector<Run> runs;
  size_t i = 0;
  while (i < s.readings.size()) {
    if (!s.readings[i]) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < s.readings.size() && s.readings[j]) ++j;
    runs.push_back({i, j - i});
    i = j;
  }
  return runs;
}

// Log-sum-exp over `logits[ids]` (or all logits when ids is empty).
double LogSumExp(std::span<const double> logits, std::span<const int> ids) {
  double max = -std::numeric_limits<double>::infinity();
  if (ids.empty()) {
    for (double v : logits) max = std::max(max, v);
  } else {
    for (int id : ids) max = std::max(max, logits[id]);
  }
  double sum = 0.0;
  if (ids.empty()) {
    for (double v : logits) sum += std::exp(v - max);
  } else {
    for (int id : ids) sum += std::exp(logits[id] - max);
  }
  return max + std::log(sum);
}

size_t EncodedLength(Variant variant, size_t n, size_t k) {
  return variant == Variant::kConcat ? n + 2 * k + 3 : 1 + n + k;
}

}  // namespace

std::string_view TrainModesName(TrainModes modes) {
  switch (modes) {
    case TrainModes::kPerfect:
      return "perfect";
    case TrainModes::kAbbreviated:
      return "abbrev";
    case TrainModes::kBoth:
      return "both";
  }
  return "perfect";
}

TrainModes ParseTrainModes(std::string_view name) {
  if (name == "perfect") return TrainModes::kPerfect;
  if (name == "abbrev" || name == "abbreviated") return TrainModes::kAbbreviated;
  if (name == "both") return TrainModes::kBoth;
  throw InvalidArgument("unknown training mode '" + std::string(name) +
                        "' (expected perfect, abbrev or both)");
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (batch_size_tokens <= 0) throw InvalidArgument("batch_size_tokens must be positive");
  if (steps < 0) throw InvalidArgument("steps must be non-negative");
  if (!(short_target_prob >= 0.0 && short_target_prob <= 1.0)) {
    throw InvalidArgument("short_target_prob must be a probability");
  }
  if (short_range.first < 1 || short_range.second < short_range.first ||
      long_range.second < long_range.first) {
    throw InvalidArgument("target length ranges must be non-empty and start at 1 or more");
  }
  if (short_range.second >= long_range.first) {
    throw InvalidArgument("short_range must lie below long_range");
  }
  if (warmup_steps < 0 || grad_clip < 0.0 || checkpoint_interval < 0) {
    throw InvalidArgument("warmup_steps, grad_clip and checkpoint_interval must be non-negative");
  }
}

AnnotatedSentence AnnotateSentence(const Lexicon& lexicon, std::u32string text) {
  AnnotatedSentence s;
  s.readings = lexicon.Annotate(text);
  s.text = std::move(text);
  return s;
}

std::optional<Instance> SampleInstance(const AnnotatedSentence& sentence,
                                       const TrainConfig& config,
                                       PinyinMode mode, std::mt19937_64& rng) {
  const auto runs = PinyinRuns(sentence);
  if (runs.empty()) return std::nullopt;
  size_t longest = 0;
  for (const auto& r : runs) longest = std::max(longest, r.length);

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const auto& range =
      coin(rng) < config.short_target_prob ? config.short_range : config.long_range;
  std::uniform_int_distribution<int> length_dist(range.first, range.second);
  const size_t length = std::min(static_cast<size_t>(length_dist(rng)), longest);

  size_t placements = 0;
  for (const auto& r : runs) {
    if (r.length >= length) placements += r.length - length + 1;
  }
  std::uniform_int_distribution<size_t> pick(0, placements - 1);
  size_t index = pick(rng);
  size_t start = 0;
  for (const auto& r : runs) {
    if (r.length < length) continue;
    const size_t count = r.length - length + 1;
    if (index < count) {
      start = r.start + index;
      break;
    }
    index -= count;
  }

  Instance inst;
  inst.context = sentence.text.substr(0, start);
  inst.target = sentence.text.substr(start, length);
  for (size_t i = start; i < start + length; ++i) {
    inst.pinyin.push_back(Lexicon::TokenFor(*sentence.readings[i], mode));
  }
  return inst;
}

double ConstrainedLogProb(std::span<const double> logits, int target,
                          std::span<const int> class_ids) {
  if (class_ids.empty()) throw InvalidArgument("empty constraint class");
  if (std::find(class_ids.begin(), class_ids.end(), target) == class_ids.end()) {
    throw InvalidArgument("target " + std::to_string(target) +
                          " is not in its constraint class");
  }
  return logits[target] - LogSumExp(logits, class_ids);
}

double LogSoftmax(std::span<const double> logits, int target) {
  return logits[target] - LogSumExp(logits, {});
}

TrainingExample MakeExample(const Model& model, const Lexicon& lexicon,
                            const Instance& instance) {
  const auto variant = model.config().variant;
  const size_t k = instance.target.size();
  const size_t max = model.config().max_positions;
  std::u32string_view context = instance.context;
  const size_t fixed = EncodedLength(variant, 0, k);
  if (fixed > max) {
    throw OverflowError("target of " + std::to_string(k) +
                        " characters does not fit in max_positions");
  }
  if (EncodedLength(variant, context.size(), k) > max) {
    context = context.substr(context.size() - (max - fixed));
  }
  TrainingExample ex;
  ex.encoded = EncodeExample(model, lexicon, context, instance.pinyin, instance.target);
  ex.mode = UniformMode(instance.pinyin);
  ex.variant = variant;
  return ex;
}

LossResult ComputeLoss(const Model& model,
                       std::span<const TrainingExample> batch,
                       const ClassTable& classes, bool pc_loss,
                       std::span<double> grads,
                       std::mt19937_64* dropout_rng) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const bool backward = !grads.empty();
  if (backward && grads.size() != model.param_count()) {
    throw InvalidArgument("gradient buffer does not match the model");
  }
  int total = 0;
  for (const auto& ex : batch) total += ex.encoded.masked_count();
  if (total == 0) throw InvalidArgument("batch has no masked positions");

  const int d = model.config().d_model;
  const int vocab = model.vocab().char_count();
  const ConstMatrixMap head(model.params().data() + model.head_w(), vocab, d);
  const double inv_total = 1.0 / total;
  double nll = 0.0;

  for (const auto& ex : batch) {
    const EncodedInput& in = ex.encoded;
    Activations acts;
    Matrix hidden = ForwardHidden(model, in, backward ? &acts : nullptr, dropout_rng);
    Matrix d_hidden;
    if (backward) d_hidden = Matrix::Zero(hidden.rows(), d);

    // Whole-vocabulary rows go through one matrix product.
    std::vector<Eigen::Index> full_rows;
    for (size_t t = 0; t < in.size(); ++t) {
      if (!in.target_mask[t]) continue;
      const bool constrained = pc_loss && in.class_ids[t] != EncodedInput::kWholeVocab;
      if (!constrained) {
        full_rows.push_back(static_cast<Eigen::Index>(t));
        continue;
      }
      const auto& ids = classes.Ids(in.class_ids[t]);
      Eigen::VectorXd logits = ClassLogits(model, hidden.row(t), ids);
      auto it = std::find(ids.begin(), ids.end(), in.targets[t]);
      if (it == ids.end()) {
        throw Error("target '" + EncodeUtf8(model.vocab().Char(in.targets[t])) +
                    "' is not in its pinyin class (lexicon/annotation mismatch)");
      }
      const size_t target_slot = static_cast<size_t>(it - ids.begin());
      const double max = logits.maxCoeff();
      Eigen::VectorXd probs = (logits.array() - max).exp();
      const double sum = probs.sum();
      nll -= logits(target_slot) - max - std::log(sum);
      if (backward) {
        probs /= sum;
        probs(target_slot) -= 1.0;
        probs *= inv_total;
        MatrixMap d_head(grads.data() + model.head_w(), vocab, d);
        for (size_t i = 0; i < ids.size(); ++i) {
          d_hidden.row(t) += probs(i) * head.row(ids[i]);
          d_head.row(ids[i]) += probs(i) * hidden.row(t);
        }
      }
    }

    if (!full_rows.empty()) {
      Matrix h(full_rows.size(), d);
      for (size_t r = 0; r < full_rows.size(); ++r) h.row(r) = hidden.row(full_rows[r]);
      Matrix logits = h * head.transpose();
      for (size_t r = 0; r < full_rows.size(); ++r) {
        const int target = in.targets[full_rows[r]];
        auto row = logits.row(r);
        const double max = row.maxCoeff();
        RowVector probs = (row.array() - max).exp();
        const double sum = probs.sum();
        nll -= row(target) - max - std::log(sum);
        if (backward) {
          probs /= sum;
          probs(target) -= 1.0;
          logits.row(r) = probs * inv_total;  // reuse as d_logits
        }
      }
      if (backward) {
        MatrixMap d_head(grads.data() + model.head_w(), vocab, d);
        d_head.noalias() += logits.transpose() * h;
        Matrix d_h = logits * head;
        for (size_t r = 0; r < full_rows.size(); ++r) {
          d_hidden.row(full_rows[r]) += d_h.row(r);
        }
      }
    }

    if (backward) BackwardHidden(model, in, acts, d_hidden, grads);
  }

  LossResult result{nll * inv_total, total};
  if (!std::isfinite(result.loss)) {
    throw Error("non-finite loss over " + std::to_string(total) +
                " positions (model " + model.id() + ")");
  }
  return result;
}

AdamOptimizer::AdamOptimizer(size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void AdamOptimizer::Step(std::span<double> params, std::span<const double> grads,
                         double learning_rate) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] -= learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

std::vector<std::u32string> LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open corpus");
  std::vector<std::u32string> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(DecodeUtf8(line));
    } catch (const InvalidArgument& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

void WarmStart(Model& target, const Model& source) {
  const ModelConfig& a = target.config();
  const ModelConfig& b = source.config();
  if (a.n_layers != b.n_layers || a.d_model != b.d_model || a.n_heads != b.n_heads ||
      a.d_ff != b.d_ff) {
    throw InvalidArgument("warm start needs matching layer shapes");
  }
  if (!(target.vocab() == source.vocab())) {
    throw InvalidArgument("warm start needs the same vocabulary");
  }
  const std::span<const double> from = source.params();
  for (const TensorSpec& t : target.tensors()) {
    const auto it = std::find_if(source.tensors().begin(), source.tensors().end(),
                                 [&](const TensorSpec& s) { return s.name == t.name; });
    if (it == source.tensors().end()) continue;
    if (it->cols != t.cols) throw InvalidArgument("warm start shape mismatch in " + t.name);
    // Row-major with equal widths, so a shared row prefix is contiguous.
    const size_t n = static_cast<size_t>(std::min(t.rows, it->rows)) * t.cols;
    std::copy_n(from.begin() + it->offset, n, target.params().begin() + t.offset);
  }
}

TrainResult Train(const std::vector<std::u32string>& corpus,
                  const Lexicon& lexicon, const ModelConfig& model_config,
                  const TrainConfig& config, const TrainOptions& options) {
  config.Validate();
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");

  std::u32string symbols;
  for (const auto& s : corpus) symbols += s;
  TrainResult result{Model(model_config, Vocabulary::Build(lexicon, symbols)), {}, 0};
  Model& model = result.model;
  if (options.init) WarmStart(model, *options.init);
  const ClassTable classes(lexicon, model.vocab());

  std::vector<AnnotatedSentence> sentences;
  for (const auto& s : corpus) {
    auto a = AnnotateSentence(lexicon, s);
    if (std::any_of(a.readings.begin(), a.readings.end(),
                    [](const auto& r) { return r.has_value(); })) {
      sentences.push_back(std::move(a));
    }
  }
  if (sentences.empty()) {
    throw InvalidArgument("no corpus sentence contains a character with pinyin");
  }

  std::ofstream metrics;
  if (!options.metrics_path.empty()) {
    metrics.open(options.metrics_path, std::ios::app);
    if (!metrics) throw Error("cannot open metrics log " + options.metrics_path.string());
  }
  std::map<std::string, std::string> meta = {
      {"train_modes", std::string(TrainModesName(config.modes))},
      {"pc_loss", config.pc_loss ? "1" : "0"},
      {"steps", std::to_string(config.steps)}};
  if (options.init) meta["init"] = options.init->id();

  std::mt19937_64 rng(config.seed);
  std::mt19937_64 dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<size_t> pick_sentence(0, sentences.size() - 1);
  std::bernoulli_distribution pick_abbrev(0.5);
  AdamOptimizer adam(model.param_count(), config.adam_beta1, config.adam_beta2,
                     config.adam_eps);
  ParamVector grads(model.param_count());

  for (int step = 1; step <= config.steps; ++step) {
    std::vector<TrainingExample> batch;
    size_t tokens = 0;
    while (tokens < static_cast<size_t>(config.batch_size_tokens)) {
      const auto& sentence = sentences[pick_sentence(rng)];
      PinyinMode mode = config.modes == TrainModes::kAbbreviated
                            ? PinyinMode::kAbbreviated
                            : PinyinMode::kPerfect;
      if (config.modes == TrainModes::kBoth && pick_abbrev(rng)) {
        mode = PinyinMode::kAbbreviated;
      }
      auto inst = SampleInstance(sentence, config, mode, rng);
      if (!inst) continue;
      batch.push_back(MakeExample(model, lexicon, *inst));
      tokens += batch.back().encoded.size();
    }
    result.examples_seen += static_cast<long>(batch.size());

    std::fill(grads.begin(), grads.end(), 0.0);
    LossResult loss = ComputeLoss(model, batch, classes, config.pc_loss, grads,
                                  model.config().dropout > 0 ? &dropout_rng : nullptr);
    if (config.grad_clip > 0.0) {
      double norm = 0.0;
      for (double g : grads) norm += g * g;
      norm = std::sqrt(norm);
      if (norm > config.grad_clip) {
        const double s = config.grad_clip / norm;
        for (double& g : grads) g *= s;
      }
    }
    double lr = config.learning_rate;
    if (config.warmup_steps > 0 && step < config.warmup_steps) {
      lr *= static_cast<double>(step) / config.warmup_steps;
    }
    adam.Step(model.params(), grads, lr);
    result.losses.push_back(loss.loss);

    if (metrics.is_open()) {
      char line[128];
      std::snprintf(line, sizeof(line), "%d\t%.10g\t%.6g\t%ld\n", step, loss.loss,
                    lr, result.examples_seen);
      metrics << line << std::flush;
    }
    if (!options.checkpoint_path.empty() && config.checkpoint_interval > 0 &&
        step % config.checkpoint_interval == 0 && step != config.steps) {
      SaveModel(model, options.checkpoint_path, meta);
    }
  }
  if (!options.checkpoint_path.empty()) SaveModel(model, options.checkpoint_path, meta);
  return result;
}

}  // namespace ime
