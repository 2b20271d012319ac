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

#ifndef IME_SERVICE_H_
#define IME_SERVICE_H_

#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>

#include "ime/decoder.h"
#include "ime/lexicon.h"
#include "ime/model.h"

namespace httplib {
class Server;
}

namespace ime {

enum class LogLevel { kDebug, kInfo, kWarn, kError };
LogLevel ParseLogLevel(std::string_view name);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int default_beam_size = 16;
  int default_top_k = 10;
  int max_beam_size = 256;
  std::string cors_origin = "*";
  LogLevel log_level = LogLevel::kInfo;
};

// IME_BIND_ADDRESS (`host` or `host:port`) and IME_LOG_LEVEL override the
// matching fields when set.
void ApplyEnvironment(ServiceConfig& config);

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
  std::map<std::string, std::string> headers;
};

// Request handling without sockets. Error bodies are
// {"code", "message", "field"}: 400 for malformed requests, 422 for
// well-formed requests the model cannot serve.
class PredictService {
 public:
  PredictService(std::shared_ptr<const Model> model,
                 std::shared_ptr<const Lexicon> lexicon, ServiceConfig config,
                 std::map<std::string, std::string> metadata = {});

  HttpResponse Handle(std::string_view method, std::string_view path,
                      std::string_view body) const;

  HttpResponse Predict(std::string_view body) const;
  HttpResponse Health() const;
  HttpResponse Config() const;

  const ServiceConfig& config() const { return config_; }

 private:
  std::shared_ptr<const Model> model_;
  std::shared_ptr<const Lexicon> lexicon_;
  Decoder decoder_;
  ServiceConfig config_;
  std::map<std::string, std::string> metadata_;
};

// Socket front end with one JSON log line per request.
class HttpServer {
 public:
  HttpServer(const PredictService& service, std::ostream& log);
  ~HttpServer();

  // Binds host:port from the service config (port 0 picks a free port) and
  // returns the bound port. Throws Error when binding fails.
  int Bind();
  // Serves until Stop(); returns after in-flight requests finish.
  void Serve();
  void Stop();

 private:
  void Log(LogLevel level, const std::string& line);

  const PredictService& service_;
  std::ostream& log_;
  std::mutex log_mu_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace ime

#endif  // IME_SERVICE_H_
