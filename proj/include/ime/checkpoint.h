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

#ifndef IME_CHECKPOINT_H_
#define IME_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>

#include "ime/model.h"

namespace ime {

// Checkpoint layout (version 1):
//
//   IMECKPT 1\n
//   key=value\n ...            config, vocabulary and metadata
//   end_header\n
//   tensor <name> <rows> <cols>\n<rows*cols little-endian float64> ...
//   checksum <fnv1a-64 of all tensor payload bytes, 16 hex digits>\n
//
// Vocabulary keys: `chars` (hex code points, comma separated, [UNK]
// excluded), `syllables` and `keys` (comma separated). Keys starting with
// `meta.` carry free-form metadata.
inline constexpr int kCheckpointVersion = 1;

struct CheckpointHeader {
  int version = kCheckpointVersion;
  std::string model_id;
  ModelConfig config;
  Vocabulary vocab;
  std::map<std::string, std::string> metadata;
};

void SaveModel(const Model& model, const std::filesystem::path& path,
               const std::map<std::string, std::string>& metadata = {});

// Throws ParseError on version mismatch, truncation, shape or checksum
// errors.
Model LoadModel(const std::filesystem::path& path);

// Reads only the text header.
CheckpointHeader ReadCheckpointHeader(const std::filesystem::path& path);

}  // namespace ime

#endif  // IME_CHECKPOINT_H_
