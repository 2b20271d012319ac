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

#include "ime/model.h"

#include <algorithm>
#include <random>

#include "ime/errors.h"

namespace ime {

std::string_view VariantName(Variant variant) {
  switch (variant) {
    case Variant::kBaseline:
      return "baseline";
    case Variant::kConcat:
      return "concat";
    case Variant::kEmbed:
      return "embed";
  }
  return "baseline";
}

Variant ParseVariant(std::string_view name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "concat") return Variant::kConcat;
  if (name == "embed") return Variant::kEmbed;
  throw InvalidArgument("unknown model variant '" + std::string(name) +
                        "' (expected baseline, concat or embed)");
}

void ModelConfig::Validate() const {
  if (n_layers <= 0 || d_model <= 0 || n_heads <= 0 || d_ff <= 0 ||
      max_positions <= 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw InvalidArgument("n_heads must divide d_model");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw InvalidArgument("dropout must be in [0, 1)");
  }
  if (variant != Variant::kBaseline && pinyin_vocab_size <= 0) {
    throw InvalidArgument(std::string(VariantName(variant)) +
                          " variant needs a pinyin vocabulary");
  }
}

int EncodedInput::masked_count() const {
  return static_cast<int>(std::count(target_mask.begin(), target_mask.end(), true));
}

Model::Model(ModelConfig config, Vocabulary vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.char_vocab_size = vocab_.char_count();
  config_.pinyin_vocab_size =
      config_.variant == Variant::kBaseline ? 0 : vocab_.pinyin_count();
  config_.Validate();

  const int d = config_.d_model;
  tok_emb_ = Add("tok_emb", input_size(), d);
  pos_emb_ = Add("pos_emb", config_.max_positions, d);
  if (has_pinyin_embedding()) {
    pin_emb_ = Add("pin_emb", vocab_.pinyin_count() + 1, d);
  }
  for (int i = 0; i < config_.n_layers; ++i) {
    const std::string p = "h" + std::to_string(i) + ".";
    LayerOffsets l;
    l.ln1_g = Add(p + "ln1_g", 1, d);
    l.ln1_b = Add(p + "ln1_b", 1, d);
    l.qkv_w = Add(p + "qkv_w", d, 3 * d);
    l.qkv_b = Add(p + "qkv_b", 1, 3 * d);
    l.proj_w = Add(p + "proj_w", d, d);
    l.proj_b = Add(p + "proj_b", 1, d);
    l.ln2_g = Add(p + "ln2_g", 1, d);
    l.ln2_b = Add(p + "ln2_b", 1, d);
    l.fc_w = Add(p + "fc_w", d, config_.d_ff);
    l.fc_b = Add(p + "fc_b", 1, config_.d_ff);
    l.fc2_w = Add(p + "fc2_w", config_.d_ff, d);
    l.fc2_b = Add(p + "fc2_b", 1, d);
    layers_.push_back(l);
  }
  lnf_g_ = Add("lnf_g", 1, d);
  lnf_b_ = Add("lnf_b", 1, d);
  head_w_ = Add("head_w", vocab_.char_count(), d);

  params_.assign(tensors_.back().offset + tensors_.back().size(), 0.0);
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  for (const auto& t : tensors_) {
    const bool gain = t.name.ends_with("_g");
    const bool bias = t.name.ends_with("_b");
    double* p = params_.data() + t.offset;
    for (size_t i = 0; i < t.size(); ++i) {
      p[i] = gain ? 1.0 : bias ? 0.0 : normal(rng);
    }
  }
  id_ = std::string(VariantName(config_.variant)) + "-" +
        std::to_string(config_.n_layers) + "L-d" +
        std::to_string(config_.d_model) + "-s" + std::to_string(config_.seed);
}

size_t Model::Add(std::string name, int rows, int cols) {
  size_t offset = tensors_.empty() ? 0 : tensors_.back().offset + tensors_.back().size();
  tensors_.push_back({std::move(name), rows, cols, offset});
  return offset;
}

const TensorSpec& Model::tensor(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw InvalidArgument("no tensor named '" + std::string(name) + "'");
}

}  // namespace ime
