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

#ifndef IME_MODEL_H_
#define IME_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ime/vocabulary.h"

namespace ime {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
// Flat parameter or gradient storage. The alignment is fixed so that the
// vectorized kernels sum in the same order on every run.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

enum class Variant { kBaseline, kConcat, kEmbed };

std::string_view VariantName(Variant variant);
Variant ParseVariant(std::string_view name);

struct ModelConfig {
  int n_layers = 2;
  int d_model = 64;
  int n_heads = 4;
  int d_ff = 256;
  int max_positions = 128;
  // Filled in from the vocabulary by the Model constructor.
  int char_vocab_size = 0;
  int pinyin_vocab_size = 0;
  Variant variant = Variant::kBaseline;
  double dropout = 0.0;
  uint64_t seed = 0;

  // Throws InvalidArgument on non-positive dimensions, n_heads not dividing
  // d_model, or dropout outside [0, 1).
  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Placement of one named tensor inside the flat parameter vector.
struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  size_t offset = 0;
  size_t size() const { return static_cast<size_t>(rows) * cols; }
};

// Offsets of the per-layer tensors, cached for the hot loops.
struct LayerOffsets {
  size_t ln1_g, ln1_b, qkv_w, qkv_b, proj_w, proj_b;
  size_t ln2_g, ln2_b, fc_w, fc_b, fc2_w, fc2_b;
};

// Pre-LN decoder-only transformer over characters. All parameters live in
// one flat vector so the optimizer, the gradient checker and the checkpoint
// code can treat them uniformly.
//
// Tensors: tok_emb [input_size x d], pos_emb [max_positions x d],
// pin_emb [pinyin_count + 1 x d] (Embed only), per layer
// h<i>.{ln1_g, ln1_b, qkv_w [d x 3d], qkv_b, proj_w [d x d], proj_b, ln2_g,
// ln2_b, fc_w [d x d_ff], fc_b, fc2_w [d_ff x d], fc2_b}, lnf_g, lnf_b and
// head_w [char_count x d].
class Model {
 public:
  // Initializes weights from config.seed: N(0, 0.02) for matrices and
  // embeddings, zero biases, unit layer-norm gains.
  Model(ModelConfig config, Vocabulary vocab);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }

  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  size_t param_count() const { return params_.size(); }

  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  // Throws InvalidArgument for unknown names.
  const TensorSpec& tensor(std::string_view name) const;

  ConstMatrixMap view(const TensorSpec& spec) const {
    return ConstMatrixMap(params_.data() + spec.offset, spec.rows, spec.cols);
  }
  MatrixMap view(const TensorSpec& spec) {
    return MatrixMap(params_.data() + spec.offset, spec.rows, spec.cols);
  }

  bool has_pinyin_tokens() const { return config_.variant == Variant::kConcat; }
  bool has_pinyin_embedding() const {
    return config_.variant == Variant::kEmbed;
  }

  // Offsets for hot loops.
  size_t tok_emb() const { return tok_emb_; }
  size_t pos_emb() const { return pos_emb_; }
  size_t pin_emb() const { return pin_emb_; }
  size_t lnf_g() const { return lnf_g_; }
  size_t lnf_b() const { return lnf_b_; }
  size_t head_w() const { return head_w_; }
  const LayerOffsets& layer(int i) const { return layers_[i]; }
  int input_size() const { return vocab_.input_size(has_pinyin_tokens()); }

 private:
  size_t Add(std::string name, int rows, int cols);

  ModelConfig config_;
  Vocabulary vocab_;
  std::string id_;
  ParamVector params_;
  std::vector<TensorSpec> tensors_;
  size_t tok_emb_ = 0, pos_emb_ = 0, pin_emb_ = 0;
  size_t lnf_g_ = 0, lnf_b_ = 0, head_w_ = 0;
  std::vector<LayerOffsets> layers_;
};

// One model input. Position t predicts token t + 1; `target_mask[t]` marks
// the predictions that enter the loss.
struct EncodedInput {
  static constexpr int kWholeVocab = -1;

  std::vector<int> token_ids;
  std::vector<int> position_ids;
  std::vector<int> pinyin_ids;  // Embed only; empty otherwise
  std::vector<bool> target_mask;
  // Character id predicted at t, -1 where the mask is off.
  std::vector<int> targets;
  // Vocabulary pinyin index of the class constraining the prediction at t,
  // or kWholeVocab.
  std::vector<int> class_ids;

  size_t size() const { return token_ids.size(); }
  int masked_count() const;
};

}  // namespace ime

#endif  // IME_MODEL_H_
