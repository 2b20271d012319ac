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

#include <cstdlib>
#include <memory>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "ime/errors.h"
#include "ime/service.h"
#include "oracles.h"
// Last: httplib includes <resolv.h>, whose `_res` macro breaks Eigen.
#include "httplib.h"
#include "json.hpp"

namespace ime {
namespace {

using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  ServiceTest() {
    auto lex = std::make_shared<const Lexicon>(testing::TinyLexicon());
    ModelConfig c;
    c.variant = Variant::kConcat;
    c.d_model = 8;
    c.n_heads = 2;
    c.d_ff = 16;
    c.n_layers = 1;
    c.max_positions = 16;
    auto model = std::make_shared<Model>(c, Vocabulary::Build(*lex));
    std::mt19937_64 rng(3);
    testing::RandomizeParams(*model, rng, 0.3);
    ServiceConfig sc;
    sc.port = 0;
    sc.default_beam_size = 4;
    sc.default_top_k = 3;
    service_ = std::make_unique<PredictService>(model, lex, sc,
                                                std::map<std::string, std::string>{{"steps", "7"}});
  }

  json Post(const std::string& body, int expected_status) {
    const HttpResponse r = service_->Handle("POST", "/v1/predict", body);
    EXPECT_EQ(r.status, expected_status) << r.body;
    return json::parse(r.body);
  }

  std::unique_ptr<PredictService> service_;
};

TEST_F(ServiceTest, PredictReturnsRankedCandidates) {
  const json out = Post(R"({"context":"我们","pinyin":["shi","ta"],"mode":"perfect"})", 200);
  ASSERT_EQ(out["candidates"].size(), 3u);
  EXPECT_EQ(out["candidates"][0]["rank"], 1);
  EXPECT_GE(out["candidates"][0]["score"].get<double>(),
            out["candidates"][1]["score"].get<double>());
  const json abbrev = Post(R"({"pinyin":"sh t","mode":"abbrev","beam_size":6,"top_k":6})", 200);
  EXPECT_EQ(abbrev["candidates"].size(), 6u);
  EXPECT_EQ(abbrev["mode"], "abbrev");
}

TEST_F(ServiceTest, MalformedRequestsAre400WithTheField) {
  EXPECT_EQ(Post("not json", 400)["code"], "invalid_json");
  EXPECT_EQ(Post(R"({"pinyin":[]})", 400)["field"], "pinyin");
  EXPECT_EQ(Post(R"({"pinyin":[1]})", 400)["field"], "pinyin");
  EXPECT_EQ(Post(R"({"pinyin":["wo"],"mode":"mixed"})", 400)["field"], "mode");
  EXPECT_EQ(Post(R"({"pinyin":["wo"],"context":5})", 400)["field"], "context");
  EXPECT_EQ(Post(R"({"pinyin":["wo"],"beam_size":0})", 400)["field"], "beam_size");
  const json e = Post(R"({"pinyin":["wo"],"beam_size":2,"top_k":5})", 400);
  EXPECT_EQ(e["field"], "top_k");
  EXPECT_TRUE(e.contains("message"));
}

TEST_F(ServiceTest, UnservableRequestsAre422) {
  const json e = Post(R"({"pinyin":["wo","zzz"]})", 422);
  EXPECT_EQ(e["code"], "unknown_pinyin");
  EXPECT_EQ(e["token"], "zzz");
  EXPECT_EQ(e["position"], 1);
  EXPECT_NE(e["message"].get<std::string>().find("zzz"), std::string::npos);
  const json big = Post(R"({"context":"我我我我我我我我我我我我我我","pinyin":["wo"]})", 422);
  EXPECT_EQ(big["field"], "context");
}

TEST_F(ServiceTest, HealthConfigRoutingAndCors) {
  const HttpResponse h = service_->Handle("GET", "/v1/health", "");
  EXPECT_EQ(h.status, 200);
  EXPECT_EQ(json::parse(h.body)["status"], "ok");
  EXPECT_EQ(h.headers.at("Access-Control-Allow-Origin"), "*");
  const json cfg = json::parse(service_->Handle("GET", "/v1/config", "").body);
  EXPECT_EQ(cfg["variant"], "concat");
  EXPECT_EQ(cfg["default_beam_size"], 4);
  EXPECT_EQ(cfg["metadata"]["steps"], "7");
  EXPECT_EQ(service_->Handle("GET", "/v1/nope", "").status, 404);
  EXPECT_EQ(service_->Handle("GET", "/v1/predict", "").status, 405);
  EXPECT_EQ(service_->Handle("OPTIONS", "/v1/predict", "").status, 204);
}

TEST_F(ServiceTest, ServesOverHttp) {
  std::ostringstream log;
  HttpServer server(*service_, log);
  const int port = server.Bind();
  std::thread serving([&] { server.Serve(); });
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto pred = client.Post("/v1/predict", R"({"pinyin":["ni","hao"]})", "application/json");
  ASSERT_TRUE(pred);
  EXPECT_EQ(pred->status, 200);
  EXPECT_EQ(json::parse(pred->body)["candidates"].size(), 3u);
  auto bad = client.Post("/v1/predict", R"({"pinyin":["ni"],"top_k":9})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(bad->get_header_value("Access-Control-Allow-Origin"), "*");
  server.Stop();
  serving.join();
  // One JSON log line per request after the listening line.
  std::istringstream lines(log.str());
  std::string line;
  int requests = 0;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    if (j.contains("path")) ++requests;
  }
  EXPECT_EQ(requests, 3);
}

TEST(ServiceConfigTest, EnvironmentOverrides) {
  ServiceConfig c;
  ::setenv("IME_BIND_ADDRESS", "0.0.0.0:9123", 1);
  ::setenv("IME_LOG_LEVEL", "warn", 1);
  ApplyEnvironment(c);
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9123);
  EXPECT_EQ(c.log_level, LogLevel::kWarn);
  ::setenv("IME_BIND_ADDRESS", "host:notaport", 1);
  EXPECT_THROW(ApplyEnvironment(c), InvalidArgument);
  ::unsetenv("IME_BIND_ADDRESS");
  ::unsetenv("IME_LOG_LEVEL");
}

}  // namespace
}  // namespace ime
