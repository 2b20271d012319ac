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

#include "ime/decoder.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ime/encoding.h"
#include "ime/errors.h"
#include "ime/transformer.h"

namespace ime {
namespace {

struct Hypothesis {
  std::u32string text;
  double score = 0.0;
  KvCache cache;
  RowVector hidden;
};

struct Expansion {
  int parent;
  int slot;  // index into the class
  double score;
};

}  // namespace

Decoder::Decoder(const Model& model, const Lexicon& lexicon)
    : model_(&model), lexicon_(&lexicon), classes_(lexicon, model.vocab()) {}

std::vector<ScoredChar> Decoder::StepDistribution(const RowVector& hidden,
                                                  const PinyinToken& token) const {
  const auto& ids = classes_.Ids(token);
  Eigen::VectorXd logits = ClassLogits(*model_, hidden, ids);
  const double max = logits.maxCoeff();
  const double lse = max + std::log((logits.array() - max).exp().sum());
  std::vector<ScoredChar> out;
  out.reserve(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    out.push_back({ids[i], model_->vocab().Char(ids[i]), logits(i) - lse});
  }
  return out;
}

void Decoder::Validate(const DecodeRequest& request) const {
  if (request.pinyin.empty()) throw InvalidArgument("pinyin sequence is empty");
  if (request.beam_size < 1) throw InvalidArgument("beam_size must be positive");
  if (request.top_k < 1 || request.top_k > request.beam_size) {
    throw InvalidArgument("top_k must be in [1, beam_size]");
  }
  UniformMode(request.pinyin);
  for (size_t j = 0; j < request.pinyin.size(); ++j) {
    const auto& token = request.pinyin[j];
    try {
      classes_.Ids(token);
      if (model_->config().variant != Variant::kBaseline) {
        model_->vocab().PinyinTokenId(token);
      }
    } catch (const UnknownPinyinError& e) {
      throw UnknownPinyinError(token.value, static_cast<long>(j),
                               std::string(e.what()) + " (position " +
                                   std::to_string(j) + ")");
    }
  }
  const size_t n = request.context.size();
  const size_t k = request.pinyin.size();
  const size_t length =
      model_->config().variant == Variant::kConcat ? n + 2 * k + 3 : 1 + n + k;
  if (length > static_cast<size_t>(model_->config().max_positions)) {
    throw OverflowError("context and pinyin need " + std::to_string(length) +
                        " positions; the model has " +
                        std::to_string(model_->config().max_positions));
  }
}

CandidateList Decoder::BeamSearch(const DecodeRequest& request) const {
  Validate(request);
  const Model& model = *model_;
  const auto variant = model.config().variant;
  const auto& vocab = model.vocab();
  const int n = static_cast<int>(request.context.size());
  const int k = static_cast<int>(request.pinyin.size());
  const PinyinMode mode = request.pinyin.front().mode;

  EncodedInput prefix;
  switch (variant) {
    case Variant::kBaseline:
      prefix = EncodeBaseline(vocab, model.config().max_positions, request.context, {});
      break;
    case Variant::kConcat:
      prefix = EncodeConcat(vocab, model.config().max_positions, request.context,
                            request.pinyin, {});
      break;
    case Variant::kEmbed: {
      auto next = NextPinyin(*lexicon_, request.context, request.pinyin, mode,
                             /*target_chars=*/false);
      prefix = EncodeEmbed(vocab, model.config().max_positions, request.context,
                           next, {});
      break;
    }
  }

  std::vector<Hypothesis> beams(1);
  beams[0].cache.reserve = static_cast<int>(prefix.size()) + k;
  beams[0].hidden = Prefill(model, prefix, &beams[0].cache);

  std::vector<Expansion> expansions;
  for (int j = 0; j < k; ++j) {
    const auto& ids = classes_.Ids(request.pinyin[j]);
    expansions.clear();
    for (size_t b = 0; b < beams.size(); ++b) {
      auto dist = StepDistribution(beams[b].hidden, request.pinyin[j]);
      for (size_t i = 0; i < dist.size(); ++i) {
        expansions.push_back({static_cast<int>(b), static_cast<int>(i),
                              beams[b].score + dist[i].log_prob});
      }
    }
    // Higher score first; equal scores by text, which for same-length
    // hypotheses means parent text, then the appended character.
    auto better = [&](const Expansion& a, const Expansion& b) {
      if (a.score != b.score) return a.score > b.score;
      const auto& ta = beams[a.parent].text;
      const auto& tb = beams[b.parent].text;
      if (a.parent != b.parent && ta != tb) return ta < tb;
      return vocab.Char(ids[a.slot]) < vocab.Char(ids[b.slot]);
    };
    const size_t keep =
        std::min(expansions.size(), static_cast<size_t>(request.beam_size));
    std::partial_sort(expansions.begin(), expansions.begin() + keep,
                      expansions.end(), better);

    std::vector<Hypothesis> next(keep);
    const bool last = j + 1 == k;
    for (size_t e = 0; e < keep; ++e) {
      const Expansion& x = expansions[e];
      const Hypothesis& parent = beams[x.parent];
      Hypothesis& h = next[e];
      const int char_id = ids[x.slot];
      h.text = parent.text;
      h.text.push_back(vocab.Char(char_id));
      h.score = x.score;
      if (!last) {
        h.cache = parent.cache;
        const int pinyin_id = variant == Variant::kEmbed
                                  ? vocab.PinyinEmbeddingId(request.pinyin[j + 1])
                                  : 0;
        h.hidden = Extend(model, &h.cache, char_id, TargetPosition(variant, n, j),
                          pinyin_id);
      }
    }
    beams = std::move(next);
  }

  CandidateList out;
  const size_t count = std::min(beams.size(), static_cast<size_t>(request.top_k));
  for (size_t i = 0; i < count; ++i) out.push_back({beams[i].text, beams[i].score});
  return out;
}

std::vector<PinyinToken> Decoder::ResolvePinyin(std::span<const std::string> raw,
                                                PinyinMode mode) const {
  std::vector<PinyinToken> tokens;
  tokens.reserve(raw.size());
  for (size_t j = 0; j < raw.size(); ++j) {
    std::string value;
    for (char c : raw[j]) {
      value.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    PinyinToken token{mode, value};
    if (!lexicon_->Contains(token)) {
      throw UnknownPinyinError(
          raw[j], static_cast<long>(j),
          "'" + raw[j] + "' at position " + std::to_string(j) + " is not a valid " +
              (mode == PinyinMode::kPerfect ? "syllable" : "abbreviation key") +
              " for " + std::string(ModeName(mode)) + " mode");
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

CandidateList Decoder::Predict(std::u32string_view context,
                               std::span<const std::string> raw_pinyin,
                               PinyinMode mode, int beam_size, int top_k) const {
  DecodeRequest request;
  request.context = std::u32string(context);
  request.pinyin = ResolvePinyin(raw_pinyin, mode);
  request.beam_size = beam_size;
  request.top_k = top_k;
  return BeamSearch(request);
}

}  // namespace ime
