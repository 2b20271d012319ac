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

#include "ime/service.h"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <utility>

#include "httplib.h"
#include "ime/errors.h"
#include "ime/utf8.h"
#include "json.hpp"

namespace ime {
namespace {

using Json = nlohmann::ordered_json;

HttpResponse JsonResponse(int status, const Json& body) {
  return {status, body.dump(), {}};
}

HttpResponse ErrorResponse(int status, std::string code, std::string message,
                           const char* field) {
  Json j;
  j["code"] = std::move(code);
  j["message"] = std::move(message);
  j["field"] = field ? Json(field) : Json(nullptr);
  return JsonResponse(status, j);
}

// Reads an optional integer field; on failure fills `error` and returns false.
bool ReadInt(const Json& body, const char* field, int fallback, int lo, int hi,
             int* out, HttpResponse* error) {
  if (!body.contains(field) || body[field].is_null()) {
    *out = fallback;
    return true;
  }
  const Json& v = body[field];
  if (!v.is_number_integer() || v.get<long long>() < lo || v.get<long long>() > hi) {
    *error = ErrorResponse(400, "invalid_field",
                           std::string(field) + " must be an integer in [" +
                               std::to_string(lo) + ", " + std::to_string(hi) + "]",
                           field);
    return false;
  }
  *out = v.get<int>();
  return true;
}

}  // namespace

LogLevel ParseLogLevel(std::string_view name) {
  if (name == "debug") return LogLevel::kDebug;
  if (name == "info") return LogLevel::kInfo;
  if (name == "warn" || name == "warning") return LogLevel::kWarn;
  if (name == "error") return LogLevel::kError;
  throw InvalidArgument("unknown log level '" + std::string(name) + "'");
}

void ApplyEnvironment(ServiceConfig& config) {
  if (const char* addr = std::getenv("IME_BIND_ADDRESS"); addr && *addr) {
    std::string value(addr);
    const auto colon = value.rfind(':');
    if (colon != std::string::npos && value.find(':') == colon) {
      const std::string port = value.substr(colon + 1);
      try {
        size_t used = 0;
        config.port = std::stoi(port, &used);
        if (used != port.size() || config.port < 0 || config.port > 65535) {
          throw std::invalid_argument(port);
        }
      } catch (const std::exception&) {
        throw InvalidArgument("IME_BIND_ADDRESS has a bad port: '" + value + "'");
      }
      value.resize(colon);
    }
    if (!value.empty()) config.host = value;
  }
  if (const char* level = std::getenv("IME_LOG_LEVEL"); level && *level) {
    config.log_level = ParseLogLevel(level);
  }
}

PredictService::PredictService(std::shared_ptr<const Model> model,
                               std::shared_ptr<const Lexicon> lexicon,
                               ServiceConfig config,
                               std::map<std::string, std::string> metadata)
    : model_(std::move(model)),
      lexicon_(std::move(lexicon)),
      decoder_(*model_, *lexicon_),
      config_(std::move(config)),
      metadata_(std::move(metadata)) {
  if (config_.default_top_k < 1 || config_.default_beam_size < config_.default_top_k ||
      config_.max_beam_size < config_.default_beam_size) {
    throw InvalidArgument("service defaults need 1 <= top_k <= beam_size <= max_beam_size");
  }
}

HttpResponse PredictService::Handle(std::string_view method,
                                    std::string_view path,
                                    std::string_view body) const {
  HttpResponse response;
  if (method == "OPTIONS") {
    response = {204, "", {}};
    response.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
    response.headers["Access-Control-Allow-Headers"] = "Content-Type";
  } else if (path == "/v1/predict") {
    response = method == "POST"
                   ? Predict(body)
                   : ErrorResponse(405, "method_not_allowed", "use POST", nullptr);
  } else if (path == "/v1/health" || path == "/v1/config") {
    if (method != "GET") {
      response = ErrorResponse(405, "method_not_allowed", "use GET", nullptr);
    } else {
      response = path == "/v1/health" ? Health() : Config();
    }
  } else {
    response = ErrorResponse(404, "not_found",
                             "no route for " + std::string(path), nullptr);
  }
  if (!config_.cors_origin.empty()) {
    response.headers["Access-Control-Allow-Origin"] = config_.cors_origin;
  }
  return response;
}

HttpResponse PredictService::Predict(std::string_view body) const {
  const auto start = std::chrono::steady_clock::now();
  Json req = Json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (req.is_discarded() || !req.is_object()) {
    return ErrorResponse(400, "invalid_json", "request body must be a JSON object",
                         nullptr);
  }

  std::u32string context;
  if (req.contains("context") && !req["context"].is_null()) {
    if (!req["context"].is_string()) {
      return ErrorResponse(400, "invalid_field", "context must be a string", "context");
    }
    try {
      context = DecodeUtf8(req["context"].get<std::string>());
    } catch (const InvalidArgument& e) {
      return ErrorResponse(400, "invalid_field", e.what(), "context");
    }
  }

  std::vector<std::string> pinyin;
  const Json* p = req.contains("pinyin") ? &req["pinyin"] : nullptr;
  if (p && p->is_string()) {
    std::istringstream words(p->get<std::string>());
    for (std::string w; words >> w;) pinyin.push_back(w);
  } else if (p && p->is_array()) {
    for (const auto& item : *p) {
      if (!item.is_string()) {
        return ErrorResponse(400, "invalid_field", "pinyin entries must be strings",
                             "pinyin");
      }
      pinyin.push_back(item.get<std::string>());
    }
  } else {
    return ErrorResponse(400, "invalid_field",
                         "pinyin must be an array of strings or a string", "pinyin");
  }
  if (pinyin.empty()) {
    return ErrorResponse(400, "invalid_field", "pinyin must not be empty", "pinyin");
  }

  PinyinMode mode = PinyinMode::kPerfect;
  if (req.contains("mode") && !req["mode"].is_null()) {
    try {
      if (!req["mode"].is_string()) throw InvalidArgument("mode must be a string");
      mode = ParseMode(req["mode"].get<std::string>());
    } catch (const Error&) {
      return ErrorResponse(400, "invalid_field", "mode must be \"perfect\" or \"abbrev\"",
                           "mode");
    }
  }

  HttpResponse error;
  int beam_size = 0;
  int top_k = 0;
  if (!ReadInt(req, "beam_size", config_.default_beam_size, 1, config_.max_beam_size,
               &beam_size, &error)) {
    return error;
  }
  if (!ReadInt(req, "top_k", std::min(config_.default_top_k, beam_size), 1,
               config_.max_beam_size, &top_k, &error)) {
    return error;
  }
  if (top_k > beam_size) {
    return ErrorResponse(400, "invalid_field",
                         "top_k (" + std::to_string(top_k) + ") exceeds beam_size (" +
                             std::to_string(beam_size) + ")",
                         "top_k");
  }

  CandidateList candidates;
  try {
    candidates = decoder_.Predict(context, pinyin, mode, beam_size, top_k);
  } catch (const UnknownPinyinError& e) {
    Json j;
    j["code"] = "unknown_pinyin";
    j["message"] = e.what();
    j["field"] = "pinyin";
    j["token"] = e.token();
    j["position"] = e.position();
    return JsonResponse(422, j);
  } catch (const OverflowError& e) {
    return ErrorResponse(422, "input_too_long", e.what(), "context");
  } catch (const InvalidArgument& e) {
    return ErrorResponse(400, "invalid_request", e.what(), nullptr);
  }

  Json out;
  out["model_id"] = model_->id();
  out["mode"] = std::string(ModeName(mode));
  out["candidates"] = Json::array();
  for (size_t i = 0; i < candidates.size(); ++i) {
    Json c;
    c["rank"] = i + 1;
    c["text"] = EncodeUtf8(candidates[i].text);
    c["score"] = candidates[i].score;
    out["candidates"].push_back(std::move(c));
  }
  out["latency_ms"] = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return JsonResponse(200, out);
}

HttpResponse PredictService::Health() const {
  Json j;
  j["status"] = "ok";
  j["model_id"] = model_->id();
  return JsonResponse(200, j);
}

HttpResponse PredictService::Config() const {
  const ModelConfig& c = model_->config();
  Json j;
  j["model_id"] = model_->id();
  j["variant"] = std::string(VariantName(c.variant));
  j["n_layers"] = c.n_layers;
  j["d_model"] = c.d_model;
  j["n_heads"] = c.n_heads;
  j["d_ff"] = c.d_ff;
  j["max_positions"] = c.max_positions;
  j["char_vocab_size"] = c.char_vocab_size;
  j["pinyin_vocab_size"] = c.pinyin_vocab_size;
  j["default_beam_size"] = config_.default_beam_size;
  j["default_top_k"] = config_.default_top_k;
  j["max_beam_size"] = config_.max_beam_size;
  j["modes"] = {"perfect", "abbrev"};
  Json meta = Json::object();
  for (const auto& [k, v] : metadata_) meta[k] = v;
  j["metadata"] = std::move(meta);
  return JsonResponse(200, j);
}

HttpServer::HttpServer(const PredictService& service, std::ostream& log)
    : service_(service), log_(log), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto start = std::chrono::steady_clock::now();
    HttpResponse out = service_.Handle(req.method, req.path, req.body);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (!out.body.empty()) res.set_content(out.body, "application/json");
    Json line;
    line["method"] = req.method;
    line["path"] = req.path;
    line["status"] = out.status;
    line["elapsed_ms"] = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    line["remote"] = req.remote_addr;
    Log(out.status >= 500 ? LogLevel::kError
        : out.status >= 400 ? LogLevel::kWarn
                            : LogLevel::kInfo,
        line.dump());
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  server_->Options(".*", handler);
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind() {
  const ServiceConfig& c = service_.config();
  int port = c.port;
  if (port == 0) {
    port = server_->bind_to_any_port(c.host);
    if (port < 0) throw Error("cannot bind " + c.host);
  } else if (!server_->bind_to_port(c.host, port)) {
    throw Error("cannot bind " + c.host + ":" + std::to_string(port));
  }
  Json line;
  line["event"] = "listening";
  line["host"] = c.host;
  line["port"] = port;
  Log(LogLevel::kInfo, line.dump());
  return port;
}

void HttpServer::Serve() {
  server_->listen_after_bind();
  Json line;
  line["event"] = "stopped";
  Log(LogLevel::kInfo, line.dump());
}

void HttpServer::Stop() {
  if (server_) server_->stop();
}

void HttpServer::Log(LogLevel level, const std::string& line) {
  if (level < service_.config().log_level) return;
  std::lock_guard<std::mutex> lock(log_mu_);
  log_ << line << '\n';
  log_.flush();
}

}  // namespace ime
