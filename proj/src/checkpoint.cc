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

#include "ime/checkpoint.h"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ime/errors.h"

namespace ime {
namespace {

constexpr std::string_view kMagic = "IMECKPT";

class Fnv1a {
 public:
  void Update(const char* data, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      hash_ ^= static_cast<uint8_t>(data[i]);
      hash_ *= 0x100000001b3ULL;
    }
  }
  uint64_t value() const { return hash_; }

 private:
  uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string Join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::vector<std::string> Split(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  size_t start = 0;
  while (true) {
    size_t comma = s.find(',', start);
    out.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
T ParseNumber(const std::string& path, const std::string& key,
              const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(path, 0, "bad value for '" + key + "': " + text);
  }
  return value;
}

// Reads the header from an open stream positioned at the start.
CheckpointHeader ParseHeader(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty checkpoint");
  std::istringstream magic(line);
  std::string word;
  int version = 0;
  magic >> word >> version;
  if (word != kMagic) throw ParseError(path, 1, "not a checkpoint file");
  if (version != kCheckpointVersion) {
    throw ParseError(path, 1, "unsupported checkpoint version " +
                                  std::to_string(version) + " (expected " +
                                  std::to_string(kCheckpointVersion) + ")");
  }

  std::map<std::string, std::string> kv;
  size_t line_no = 1;
  bool ended = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "end_header") {
      ended = true;
      break;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, line_no, "expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!ended) throw ParseError(path, line_no, "truncated header");

  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(path, 0, "missing header key '" + key + "'");
    return it->second;
  };

  CheckpointHeader h;
  h.version = version;
  h.model_id = get("model_id");
  ModelConfig& c = h.config;
  c.variant = ParseVariant(get("variant"));
  c.n_layers = ParseNumber<int>(path, "n_layers", get("n_layers"));
  c.d_model = ParseNumber<int>(path, "d_model", get("d_model"));
  c.n_heads = ParseNumber<int>(path, "n_heads", get("n_heads"));
  c.d_ff = ParseNumber<int>(path, "d_ff", get("d_ff"));
  c.max_positions = ParseNumber<int>(path, "max_positions", get("max_positions"));
  c.char_vocab_size = ParseNumber<int>(path, "char_vocab_size", get("char_vocab_size"));
  c.pinyin_vocab_size =
      ParseNumber<int>(path, "pinyin_vocab_size", get("pinyin_vocab_size"));
  c.dropout = std::stod(get("dropout"));
  c.seed = ParseNumber<uint64_t>(path, "seed", get("seed"));

  std::vector<char32_t> chars;
  for (const auto& hex : Split(get("chars"))) {
    uint32_t cp = 0;
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
    if (ec != std::errc() || ptr != hex.data() + hex.size()) {
      throw ParseError(path, 0, "bad code point '" + hex + "'");
    }
    chars.push_back(static_cast<char32_t>(cp));
  }
  h.vocab = Vocabulary(std::move(chars), Split(get("syllables")), Split(get("keys")));
  if (h.vocab.char_count() != c.char_vocab_size) {
    throw ParseError(path, 0, "char_vocab_size does not match the vocabulary");
  }
  for (const auto& [key, value] : kv) {
    if (key.starts_with("meta.")) h.metadata[key.substr(5)] = value;
  }
  return h;
}

}  // namespace

void SaveModel(const Model& model, const std::filesystem::path& path,
               const std::map<std::string, std::string>& metadata) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  const auto& c = model.config();
  const auto& v = model.vocab();

  std::ostringstream header;
  header << kMagic << ' ' << kCheckpointVersion << '\n';
  header << "model_id=" << model.id() << '\n';
  header << "variant=" << VariantName(c.variant) << '\n';
  header << "n_layers=" << c.n_layers << '\n';
  header << "d_model=" << c.d_model << '\n';
  header << "n_heads=" << c.n_heads << '\n';
  header << "d_ff=" << c.d_ff << '\n';
  header << "max_positions=" << c.max_positions << '\n';
  header << "char_vocab_size=" << c.char_vocab_size << '\n';
  header << "pinyin_vocab_size=" << c.pinyin_vocab_size << '\n';
  header << "dropout=" << FormatDouble(c.dropout) << '\n';
  header << "seed=" << c.seed << '\n';
  header << "chars=";
  for (size_t i = 0; i < v.chars().size(); ++i) {
    if (i) header << ',';
    header << std::hex << static_cast<uint32_t>(v.chars()[i]) << std::dec;
  }
  header << '\n';
  header << "syllables=" << Join(v.syllables()) << '\n';
  header << "keys=" << Join(v.keys()) << '\n';
  for (const auto& [key, value] : metadata) {
    header << "meta." << key << '=' << value << '\n';
  }
  header << "end_header\n";
  out << header.str();

  Fnv1a hash;
  std::vector<char> buf;
  for (const auto& t : model.tensors()) {
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    buf.resize(t.size() * 8);
    const double* p = model.params().data() + t.offset;
    for (size_t i = 0; i < t.size(); ++i) {
      const auto bits = std::bit_cast<uint64_t>(p[i]);
      for (int b = 0; b < 8; ++b) {
        buf[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
      }
    }
    hash.Update(buf.data(), buf.size());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  char digest[17];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(hash.value()));
  out << "checksum " << digest << '\n';
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

CheckpointHeader ReadCheckpointHeader(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open checkpoint");
  return ParseHeader(in, path.string());
}

Model LoadModel(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(name, 0, "cannot open checkpoint");
  CheckpointHeader h = ParseHeader(in, name);

  Model model(h.config, h.vocab);
  if (model.config() != h.config) {
    throw ParseError(name, 0, "header config is inconsistent with its vocabulary");
  }
  model.set_id(h.model_id);

  Fnv1a hash;
  std::vector<char> buf;
  std::string line;
  for (const auto& t : model.tensors()) {
    if (!std::getline(in, line)) throw ParseError(name, 0, "truncated before tensor " + t.name);
    std::istringstream ls(line);
    std::string word, tname;
    int rows = 0, cols = 0;
    ls >> word >> tname >> rows >> cols;
    if (word != "tensor" || tname != t.name || rows != t.rows || cols != t.cols) {
      throw ParseError(name, 0, "expected tensor " + t.name + " " +
                                    std::to_string(t.rows) + "x" +
                                    std::to_string(t.cols) + ", got '" + line + "'");
    }
    buf.resize(t.size() * 8);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
      throw ParseError(name, 0, "truncated tensor " + t.name);
    }
    hash.Update(buf.data(), buf.size());
    double* p = model.params().data() + t.offset;
    for (size_t i = 0; i < t.size(); ++i) {
      uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<uint64_t>(static_cast<uint8_t>(buf[i * 8 + b])) << (8 * b);
      }
      p[i] = std::bit_cast<double>(bits);
    }
  }
  if (!std::getline(in, line)) throw ParseError(name, 0, "missing checksum");
  char digest[17];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(hash.value()));
  if (line != std::string("checksum ") + digest) {
    throw ParseError(name, 0, "checksum mismatch");
  }
  return model;
}

}  // namespace ime
