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

#ifndef IME_TRANSFORMER_H_
#define IME_TRANSFORMER_H_

#include <random>
#include <span>
#include <vector>

#include "ime/model.h"

namespace ime {

// Values saved by the forward pass for the backward pass.
struct LayerActivations {
  Matrix x_in;
  Matrix ln1_xhat;
  Eigen::VectorXd ln1_rstd;
  Matrix ln1_out;
  Matrix qkv;
  std::vector<Matrix> probs;  // per head, causal
  Matrix attn;                // heads concatenated, before projection
  Matrix proj_mask;           // empty when dropout is off
  Matrix x_mid;
  Matrix ln2_xhat;
  Eigen::VectorXd ln2_rstd;
  Matrix ln2_out;
  Matrix fc_pre;
  Matrix fc_act;
  Matrix fc2_mask;
};

struct Activations {
  Matrix emb_mask;
  std::vector<LayerActivations> layers;
  Matrix x_final;
  Matrix lnf_xhat;
  Eigen::VectorXd lnf_rstd;
};

// Keys and values of every processed position, per layer.
struct KvCache {
  std::vector<Matrix> keys;  // [capacity x d] each
  std::vector<Matrix> values;
  int length = 0;
  // Rows to allocate at prefill; Extend grows the buffers when needed.
  int reserve = 0;
};

// Sum of token, position and (Embed) next-pinyin embeddings, T x d.
Matrix EmbedInputs(const Model& model, const EncodedInput& input);

// Final-layer-norm hidden states, T x d. Attention is causal in sequence
// order (position ids only select embedding rows). `acts` records what
// BackwardHidden needs; `dropout_rng` enables dropout; `cache` receives the
// keys and values of every position.
Matrix ForwardHidden(const Model& model, const EncodedInput& input,
                     Activations* acts = nullptr,
                     std::mt19937_64* dropout_rng = nullptr,
                     KvCache* cache = nullptr);

// Accumulates into `grads` (laid out like model.params()) the gradient of a
// scalar whose derivative with respect to the hidden states is `d_hidden`.
void BackwardHidden(const Model& model, const EncodedInput& input,
                    const Activations& acts, const Matrix& d_hidden,
                    std::span<double> grads);

// Logits over the character vocabulary for every position, T x char_count.
Matrix Forward(const Model& model, const EncodedInput& input);

// Logits for `char_ids` only, given one hidden row.
Eigen::VectorXd ClassLogits(const Model& model,
                            const Eigen::Ref<const RowVector>& hidden,
                            std::span<const int> char_ids);

// Runs the whole input, leaving its keys/values in `cache`; returns the
// hidden state of the last position.
RowVector Prefill(const Model& model, const EncodedInput& input,
                  KvCache* cache);

// Appends one token to `cache` and returns its hidden state.
// `pinyin_id` is ignored unless the model has a pinyin embedding.
RowVector Extend(const Model& model, KvCache* cache, int token_id,
                 int position_id, int pinyin_id);

}  // namespace ime

#endif  // IME_TRANSFORMER_H_
