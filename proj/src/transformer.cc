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

#include "ime/transformer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ime/errors.h"

namespace ime {
namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

ConstMatrixMap Weights(const Model& m, size_t offset, int rows, int cols) {
  return ConstMatrixMap(m.params().data() + offset, rows, cols);
}

Eigen::Map<const RowVector> Row(const Model& m, size_t offset, int n) {
  return Eigen::Map<const RowVector>(m.params().data() + offset, n);
}

MatrixMap Grad(std::span<double> grads, size_t offset, int rows, int cols) {
  return MatrixMap(grads.data() + offset, rows, cols);
}

Eigen::Map<RowVector> GradRow(std::span<double> grads, size_t offset, int n) {
  return Eigen::Map<RowVector>(grads.data() + offset, n);
}

double Gelu(double u) {
  return 0.5 * u * (1.0 + std::tanh(kGeluScale * (u + kGeluCubic * u * u * u)));
}

double GeluGrad(double u) {
  const double th = std::tanh(kGeluScale * (u + kGeluCubic * u * u * u));
  return 0.5 * (1.0 + th) +
         0.5 * u * (1.0 - th * th) * kGeluScale *
             (1.0 + 3.0 * kGeluCubic * u * u);
}

void LayerNorm(const Matrix& x, const Eigen::Map<const RowVector>& gain,
               const Eigen::Map<const RowVector>& bias, Matrix* out,
               Matrix* xhat, Eigen::VectorXd* rstd) {
  const Eigen::Index rows = x.rows();
  out->resize(rows, x.cols());
  if (xhat) xhat->resize(rows, x.cols());
  if (rstd) rstd->resize(rows);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const double mean = x.row(t).mean();
    RowVector centered = x.row(t).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(x.cols());
    const double r = 1.0 / std::sqrt(var + kLayerNormEps);
    RowVector normed = centered * r;
    out->row(t) = normed.cwiseProduct(gain) + bias;
    if (xhat) xhat->row(t) = normed;
    if (rstd) (*rstd)(t) = r;
  }
}

// Adds d(loss)/dx to `dx`, and the gain/bias gradients to the grad buffer.
void LayerNormBackward(const Matrix& dout, const Matrix& xhat,
                       const Eigen::VectorXd& rstd,
                       const Eigen::Map<const RowVector>& gain,
                       Eigen::Map<RowVector> d_gain,
                       Eigen::Map<RowVector> d_bias, Matrix* dx) {
  d_gain += dout.cwiseProduct(xhat).colwise().sum();
  d_bias += dout.colwise().sum();
  const double inv_n = 1.0 / static_cast<double>(dout.cols());
  for (Eigen::Index t = 0; t < dout.rows(); ++t) {
    RowVector dxhat = dout.row(t).cwiseProduct(gain);
    const double m1 = dxhat.sum() * inv_n;
    const double m2 = dxhat.dot(xhat.row(t)) * inv_n;
    dx->row(t) += rstd(t) * (dxhat.array() - m1 - xhat.row(t).array() * m2).matrix();
  }
}

void CausalSoftmax(Matrix* scores) {
  for (Eigen::Index i = 0; i < scores->rows(); ++i) {
    double max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j <= i; ++j) max = std::max(max, (*scores)(i, j));
    double sum = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double e = std::exp((*scores)(i, j) - max);
      (*scores)(i, j) = e;
      sum += e;
    }
    for (Eigen::Index j = 0; j <= i; ++j) (*scores)(i, j) /= sum;
    for (Eigen::Index j = i + 1; j < scores->cols(); ++j) (*scores)(i, j) = 0.0;
  }
}

Matrix DropoutMask(Eigen::Index rows, Eigen::Index cols, double p,
                   std::mt19937_64* rng) {
  Matrix mask(rows, cols);
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = keep(*rng) ? scale : 0.0;
  }
  return mask;
}

void ValidateInput(const Model& model, const EncodedInput& input) {
  const size_t n = input.size();
  const auto& cfg = model.config();
  if (n == 0) throw InvalidArgument("empty model input");
  if (n > static_cast<size_t>(cfg.max_positions)) {
    throw OverflowError("input of " + std::to_string(n) +
                        " tokens exceeds max_positions " +
                        std::to_string(cfg.max_positions));
  }
  if (input.position_ids.size() != n) {
    throw InvalidArgument("position_ids length differs from token_ids");
  }
  if (model.has_pinyin_embedding() && input.pinyin_ids.size() != n) {
    throw InvalidArgument("pinyin_ids length differs from token_ids");
  }
  for (size_t t = 0; t < n; ++t) {
    if (input.token_ids[t] < 0 || input.token_ids[t] >= model.input_size()) {
      throw InvalidArgument("token id out of range at " + std::to_string(t));
    }
    if (input.position_ids[t] < 0 ||
        input.position_ids[t] >= cfg.max_positions) {
      throw InvalidArgument("position id out of range at " + std::to_string(t));
    }
    if (model.has_pinyin_embedding() &&
        (input.pinyin_ids[t] < 0 ||
         input.pinyin_ids[t] > model.vocab().pinyin_count())) {
      throw InvalidArgument("pinyin id out of range at " + std::to_string(t));
    }
  }
}

}  // namespace

Matrix EmbedInputs(const Model& model, const EncodedInput& input) {
  ValidateInput(model, input);
  const int d = model.config().d_model;
  const auto tok = Weights(model, model.tok_emb(), model.input_size(), d);
  const auto pos = Weights(model, model.pos_emb(), model.config().max_positions, d);
  Matrix x(input.size(), d);
  for (size_t t = 0; t < input.size(); ++t) {
    x.row(t) = tok.row(input.token_ids[t]) + pos.row(input.position_ids[t]);
  }
  if (model.has_pinyin_embedding()) {
    const auto pin =
        Weights(model, model.pin_emb(), model.vocab().pinyin_count() + 1, d);
    for (size_t t = 0; t < input.size(); ++t) {
      x.row(t) += pin.row(input.pinyin_ids[t]);
    }
  }
  return x;
}

Matrix ForwardHidden(const Model& model, const EncodedInput& input,
                     Activations* acts, std::mt19937_64* dropout_rng,
                     KvCache* cache) {
  const auto& cfg = model.config();
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const int hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool dropout = dropout_rng != nullptr && cfg.dropout > 0.0;
  const Eigen::Index T = static_cast<Eigen::Index>(input.size());

  Matrix x = EmbedInputs(model, input);
  if (acts) acts->layers.resize(cfg.n_layers);
  if (dropout) {
    Matrix mask = DropoutMask(T, d, cfg.dropout, dropout_rng);
    x = x.cwiseProduct(mask);
    if (acts) acts->emb_mask = std::move(mask);
  }
  if (cache) {
    const Eigen::Index rows = std::max<Eigen::Index>(
        T, std::min(cache->reserve, cfg.max_positions));
    cache->keys.assign(cfg.n_layers, Matrix::Zero(rows, d));
    cache->values.assign(cfg.n_layers, Matrix::Zero(rows, d));
    cache->length = static_cast<int>(T);
  }

  Matrix a, xhat, attn(T, d), scores;
  Eigen::VectorXd rstd;
  for (int li = 0; li < cfg.n_layers; ++li) {
    const LayerOffsets& l = model.layer(li);
    LayerActivations* la = acts ? &acts->layers[li] : nullptr;
    if (la) la->x_in = x;

    LayerNorm(x, Row(model, l.ln1_g, d), Row(model, l.ln1_b, d), &a, &xhat, &rstd);
    Matrix qkv = a * Weights(model, l.qkv_w, d, 3 * d);
    qkv.rowwise() += Row(model, l.qkv_b, 3 * d);
    if (cache) {
      cache->keys[li].topRows(T) = qkv.middleCols(d, d);
      cache->values[li].topRows(T) = qkv.middleCols(2 * d, d);
    }
    if (la) la->probs.resize(heads);
    for (int h = 0; h < heads; ++h) {
      scores.noalias() = qkv.middleCols(h * hd, hd) *
                         qkv.middleCols(d + h * hd, hd).transpose();
      scores *= scale;
      CausalSoftmax(&scores);
      attn.middleCols(h * hd, hd).noalias() =
          scores * qkv.middleCols(2 * d + h * hd, hd);
      if (la) la->probs[h] = scores;
    }
    Matrix y = attn * Weights(model, l.proj_w, d, d);
    y.rowwise() += Row(model, l.proj_b, d);
    if (dropout) {
      Matrix mask = DropoutMask(T, d, cfg.dropout, dropout_rng);
      y = y.cwiseProduct(mask);
      if (la) la->proj_mask = std::move(mask);
    }
    if (la) {
      la->ln1_xhat = xhat;
      la->ln1_rstd = rstd;
      la->ln1_out = a;
      la->qkv = std::move(qkv);
      la->attn = attn;
    }
    x += y;
    if (la) la->x_mid = x;

    LayerNorm(x, Row(model, l.ln2_g, d), Row(model, l.ln2_b, d), &a, &xhat, &rstd);
    Matrix pre = a * Weights(model, l.fc_w, d, cfg.d_ff);
    pre.rowwise() += Row(model, l.fc_b, cfg.d_ff);
    Matrix act = pre.unaryExpr(&Gelu);
    Matrix z = act * Weights(model, l.fc2_w, cfg.d_ff, d);
    z.rowwise() += Row(model, l.fc2_b, d);
    if (dropout) {
      Matrix mask = DropoutMask(T, d, cfg.dropout, dropout_rng);
      z = z.cwiseProduct(mask);
      if (la) la->fc2_mask = std::move(mask);
    }
    if (la) {
      la->ln2_xhat = xhat;
      la->ln2_rstd = rstd;
      la->ln2_out = a;
      la->fc_pre = std::move(pre);
      la->fc_act = std::move(act);
    }
    x += z;
  }

  Matrix hidden;
  if (acts) {
    acts->x_final = x;
    LayerNorm(x, Row(model, model.lnf_g(), d), Row(model, model.lnf_b(), d),
              &hidden, &acts->lnf_xhat, &acts->lnf_rstd);
  } else {
    LayerNorm(x, Row(model, model.lnf_g(), d), Row(model, model.lnf_b(), d),
              &hidden, nullptr, nullptr);
  }
  return hidden;
}

void BackwardHidden(const Model& model, const EncodedInput& input,
                    const Activations& acts, const Matrix& d_hidden,
                    std::span<double> grads) {
  const auto& cfg = model.config();
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const int hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const Eigen::Index T = static_cast<Eigen::Index>(input.size());

  Matrix dx = Matrix::Zero(T, d);
  LayerNormBackward(d_hidden, acts.lnf_xhat, acts.lnf_rstd,
                    Row(model, model.lnf_g(), d),
                    GradRow(grads, model.lnf_g(), d),
                    GradRow(grads, model.lnf_b(), d), &dx);

  for (int li = cfg.n_layers - 1; li >= 0; --li) {
    const LayerOffsets& l = model.layer(li);
    const LayerActivations& la = acts.layers[li];

    // Feed-forward branch.
    Matrix dz = la.fc2_mask.size() ? Matrix(dx.cwiseProduct(la.fc2_mask)) : dx;
    Grad(grads, l.fc2_w, cfg.d_ff, d).noalias() += la.fc_act.transpose() * dz;
    GradRow(grads, l.fc2_b, d) += dz.colwise().sum();
    Matrix d_pre = dz * Weights(model, l.fc2_w, cfg.d_ff, d).transpose();
    d_pre = d_pre.cwiseProduct(la.fc_pre.unaryExpr(&GeluGrad));
    Grad(grads, l.fc_w, d, cfg.d_ff).noalias() += la.ln2_out.transpose() * d_pre;
    GradRow(grads, l.fc_b, cfg.d_ff) += d_pre.colwise().sum();
    Matrix d_ln2 = d_pre * Weights(model, l.fc_w, d, cfg.d_ff).transpose();
    LayerNormBackward(d_ln2, la.ln2_xhat, la.ln2_rstd, Row(model, l.ln2_g, d),
                      GradRow(grads, l.ln2_g, d), GradRow(grads, l.ln2_b, d),
                      &dx);

    // Attention branch.
    Matrix dy = la.proj_mask.size() ? Matrix(dx.cwiseProduct(la.proj_mask)) : dx;
    Grad(grads, l.proj_w, d, d).noalias() += la.attn.transpose() * dy;
    GradRow(grads, l.proj_b, d) += dy.colwise().sum();
    Matrix d_attn = dy * Weights(model, l.proj_w, d, d).transpose();
    Matrix d_qkv(T, 3 * d);
    for (int h = 0; h < heads; ++h) {
      const Matrix& p = la.probs[h];
      auto q = la.qkv.middleCols(h * hd, hd);
      auto k = la.qkv.middleCols(d + h * hd, hd);
      auto v = la.qkv.middleCols(2 * d + h * hd, hd);
      auto d_out = d_attn.middleCols(h * hd, hd);
      Matrix d_p = d_out * v.transpose();
      d_qkv.middleCols(2 * d + h * hd, hd).noalias() = p.transpose() * d_out;
      // Softmax backward, row-wise; masked entries have p = 0.
      Eigen::VectorXd row_dot = d_p.cwiseProduct(p).rowwise().sum();
      Matrix d_s = p.cwiseProduct(d_p.colwise() - row_dot);
      d_qkv.middleCols(h * hd, hd).noalias() = (d_s * k) * scale;
      d_qkv.middleCols(d + h * hd, hd).noalias() = (d_s.transpose() * q) * scale;
    }
    Grad(grads, l.qkv_w, d, 3 * d).noalias() += la.ln1_out.transpose() * d_qkv;
    GradRow(grads, l.qkv_b, 3 * d) += d_qkv.colwise().sum();
    Matrix d_ln1 = d_qkv * Weights(model, l.qkv_w, d, 3 * d).transpose();
    LayerNormBackward(d_ln1, la.ln1_xhat, la.ln1_rstd, Row(model, l.ln1_g, d),
                      GradRow(grads, l.ln1_g, d), GradRow(grads, l.ln1_b, d),
                      &dx);
  }

  if (acts.emb_mask.size()) dx = dx.cwiseProduct(acts.emb_mask);
  auto d_tok = Grad(grads, model.tok_emb(), model.input_size(), d);
  auto d_pos = Grad(grads, model.pos_emb(), cfg.max_positions, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    d_tok.row(input.token_ids[t]) += dx.row(t);
    d_pos.row(input.position_ids[t]) += dx.row(t);
  }
  if (model.has_pinyin_embedding()) {
    auto d_pin =
        Grad(grads, model.pin_emb(), model.vocab().pinyin_count() + 1, d);
    for (Eigen::Index t = 0; t < T; ++t) {
      d_pin.row(input.pinyin_ids[t]) += dx.row(t);
    }
  }
}

Matrix Forward(const Model& model, const EncodedInput& input) {
  Matrix hidden = ForwardHidden(model, input);
  const auto head = Weights(model, model.head_w(), model.vocab().char_count(),
                            model.config().d_model);
  return hidden * head.transpose();
}

Eigen::VectorXd ClassLogits(const Model& model,
                            const Eigen::Ref<const RowVector>& hidden,
                            std::span<const int> char_ids) {
  const int d = model.config().d_model;
  const double* head = model.params().data() + model.head_w();
  Eigen::VectorXd logits(char_ids.size());
  for (size_t i = 0; i < char_ids.size(); ++i) {
    logits(i) = hidden.dot(
        Eigen::Map<const RowVector>(head + static_cast<size_t>(char_ids[i]) * d, d));
  }
  return logits;
}

RowVector Prefill(const Model& model, const EncodedInput& input,
                  KvCache* cache) {
  Matrix hidden = ForwardHidden(model, input, nullptr, nullptr, cache);
  return hidden.row(hidden.rows() - 1);
}

RowVector Extend(const Model& model, KvCache* cache, int token_id,
                 int position_id, int pinyin_id) {
  const auto& cfg = model.config();
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const int hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const int t = cache->length;
  if (t >= cfg.max_positions) {
    throw OverflowError("decoding past max_positions " +
                        std::to_string(cfg.max_positions));
  }
  if (token_id < 0 || token_id >= model.input_size() || position_id < 0 ||
      position_id >= cfg.max_positions ||
      (model.has_pinyin_embedding() &&
       (pinyin_id < 0 || pinyin_id > model.vocab().pinyin_count()))) {
    throw InvalidArgument("token, position or pinyin id out of range");
  }
  if (cache->keys.empty()) throw InvalidArgument("Extend on an empty cache");
  if (t >= cache->keys.front().rows()) {
    const Eigen::Index rows =
        std::min<Eigen::Index>(cfg.max_positions, 2 * cache->keys.front().rows());
    for (auto& m : cache->keys) m.conservativeResize(rows, Eigen::NoChange);
    for (auto& m : cache->values) m.conservativeResize(rows, Eigen::NoChange);
  }

  Matrix x = Weights(model, model.tok_emb(), model.input_size(), d).row(token_id) +
             Weights(model, model.pos_emb(), cfg.max_positions, d).row(position_id);
  if (model.has_pinyin_embedding()) {
    x += Weights(model, model.pin_emb(), model.vocab().pinyin_count() + 1, d)
             .row(pinyin_id);
  }

  Matrix a;
  RowVector attn(d);
  for (int li = 0; li < cfg.n_layers; ++li) {
    const LayerOffsets& l = model.layer(li);
    LayerNorm(x, Row(model, l.ln1_g, d), Row(model, l.ln1_b, d), &a, nullptr, nullptr);
    RowVector qkv = a * Weights(model, l.qkv_w, d, 3 * d);
    qkv += Row(model, l.qkv_b, 3 * d);
    Matrix& keys = cache->keys[li];
    Matrix& values = cache->values[li];
    keys.row(t) = qkv.segment(d, d);
    values.row(t) = qkv.segment(2 * d, d);
    for (int h = 0; h < heads; ++h) {
      Eigen::VectorXd s =
          keys.block(0, h * hd, t + 1, hd) * qkv.segment(h * hd, hd).transpose();
      s *= scale;
      const double max = s.maxCoeff();
      s = (s.array() - max).exp();
      s /= s.sum();
      attn.segment(h * hd, hd) =
          s.transpose() * values.block(0, h * hd, t + 1, hd);
    }
    RowVector y = attn * Weights(model, l.proj_w, d, d);
    x.row(0) += y + Row(model, l.proj_b, d);

    LayerNorm(x, Row(model, l.ln2_g, d), Row(model, l.ln2_b, d), &a, nullptr, nullptr);
    RowVector pre = a * Weights(model, l.fc_w, d, cfg.d_ff);
    pre += Row(model, l.fc_b, cfg.d_ff);
    RowVector act = pre.unaryExpr(&Gelu);
    x.row(0) += act * Weights(model, l.fc2_w, cfg.d_ff, d) + Row(model, l.fc2_b, d);
  }
  cache->length = t + 1;
  Matrix hidden;
  LayerNorm(x, Row(model, model.lnf_g(), d), Row(model, model.lnf_b(), d),
            &hidden, nullptr, nullptr);
  return hidden.row(0);
}

}  // namespace ime
