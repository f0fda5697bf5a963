// Copyright 2026 The Lie-Sensor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "liesensor/binary_io.hpp"
#include "liesensor/error.hpp"
#include "liesensor/random.hpp"
#include "liesensor/service/config.hpp"
#include "liesensor/service/service.hpp"
#include "support.hpp"

using namespace liesensor;
using namespace liesensor::service;
using nlohmann::json;

namespace {

void install_fixture_models(Service& s) {
  const auto& m = test::fixture_models();
  s.set_models(m.bundle, m.network.clone(), m.cascade);
}

std::string happy_b64() {
  static const std::string b64 = base64_encode(binary::read_file(test::fixture_path("happy_face.pgm")));
  return b64;
}

std::string request(const std::string& session, const std::string& text, const std::string& image) {
  return json{{"session_id", session}, {"text", text}, {"image_pgm_b64", image}}.dump();
}

std::string error_code(const Response& r) { return json::parse(r.body).at("error").at("code"); }

}  // namespace

TEST(Base64, RoundTripAndStrictness) {
  EXPECT_EQ(base64_encode(""), "");
  EXPECT_EQ(base64_encode("f"), "Zg==");
  EXPECT_EQ(base64_encode("fo"), "Zm8=");
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
  EXPECT_EQ(base64_decode("Zm9vYg=="), "foob");
  EXPECT_EQ(base64_decode(""), "");
  for (const char* bad : {"Zm9", "Zm9vYg=", "Zm9v\nYmFy", "Zm9v!mFy", "Z===", "=Zm9"})
    EXPECT_FALSE(base64_decode(bad)) << bad;
  Rng rng(1);
  for (int i = 0; i < 300; ++i) {
    std::string s(rng.index(100), '\0');
    for (auto& c : s) c = static_cast<char>(rng.index(256));
    ASSERT_EQ(base64_decode(base64_encode(s)), s);
  }
}

TEST(Config, ParseAndEnvironment) {
  const auto cfg = parse_config(
      "# service\n"
      "port = 9001\n"
      "bind_address=0.0.0.0\n"
      "\n"
      "bundle_path = models/text.bundle\n"
      "max_image_bytes = 1000\n");
  EXPECT_EQ(cfg.port, 9001);
  EXPECT_EQ(cfg.bind_address, "0.0.0.0");
  EXPECT_EQ(cfg.bundle_path, "models/text.bundle");
  EXPECT_EQ(cfg.max_image_bytes, 1000u);
  EXPECT_EQ(cfg.request_timeout_s, 10);

  auto over = cfg;
  const std::map<std::string, std::string> env = {{"LIESENSOR_PORT", "7000"}, {"LIESENSOR_LOG_PATH", "/tmp/x.log"}};
  apply_env_overrides(over, [&](const char* k) -> const char* {
    const auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  EXPECT_EQ(over.port, 7000);
  EXPECT_EQ(over.log_path, "/tmp/x.log");
  EXPECT_EQ(over.bind_address, "0.0.0.0");

  try {
    parse_config("port = 80\ncolour = blue\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("port = eighty\n"), DataError);
  EXPECT_THROW(parse_config("just words\n"), DataError);
  EXPECT_THROW(apply_env_overrides(over, [](const char* k) -> const char* {
                 return std::string(k) == "LIESENSOR_PORT" ? "x" : nullptr;
               }),
               DataError);
}

TEST(Config, RelativePathsResolveAgainstFile) {
  const auto dir = test::temp_dir("config");
  std::ofstream(dir / "svc.conf") << "bundle_path = m/text.bundle\nweights_path = /abs/w.bin\n";
  const auto cfg = load_config(dir / "svc.conf", [](const char*) -> const char* { return nullptr; });
  EXPECT_EQ(cfg.bundle_path, dir / "m/text.bundle");
  EXPECT_EQ(cfg.weights_path, "/abs/w.bin");
  EXPECT_THROW(load_config(dir / "missing.conf"), DataError);
}

TEST(ServiceHandlers, NotReadyBeforeModels) {
  Service s(ServiceConfig{});
  EXPECT_EQ(s.health().status, 503);
  EXPECT_EQ(json::parse(s.health().body).at("status"), "initializing");
  const auto r = s.verify(request("a", "hi", ""));
  EXPECT_EQ(r.status, 503);
  EXPECT_EQ(error_code(r), "not_ready");
}

TEST(ServiceHandlers, VerifyAndErrors) {
  ServiceConfig cfg;
  cfg.max_image_bytes = 64 * 1024;
  Service s(cfg);
  install_fixture_models(s);
  const auto health = json::parse(s.health().body);
  EXPECT_EQ(health.at("status"), "ok");
  EXPECT_EQ(health.at("model_versions").size(), 3u);

  auto r = s.verify(request("alice", "so sad and lonely today", happy_b64()));
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  EXPECT_EQ(j.at("verdict"), "Liar");
  EXPECT_EQ(j.at("session_id"), "alice");
  EXPECT_EQ(j.at("message_id"), 1);

  r = s.verify(request("alice", "great happy day", happy_b64()));
  EXPECT_EQ(json::parse(r.body).at("verdict"), "Honest");

  const vision::GrayImage blank(80, 80, 100);
  r = s.verify(request("alice", "happy", base64_encode(vision::encode_pgm(blank))));
  ASSERT_EQ(r.status, 200);
  j = json::parse(r.body);
  EXPECT_TRUE(j.at("verdict").is_null());
  EXPECT_EQ(j.at("reason"), "no face");

  EXPECT_EQ(error_code(s.verify("{not json")), "bad_json");
  EXPECT_EQ(s.verify("[1,2]").status, 400);
  EXPECT_EQ(s.verify(R"({"session_id": 5, "text": "x"})").status, 400);
  EXPECT_EQ(s.verify(request("", "x", "")).status, 400);

  r = s.verify(request("bob", "   ", ""));
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(error_code(r), "empty_message");

  r = s.verify(request("bob", "x", "@@@@"));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_code(r), "bad_image_encoding");

  r = s.verify(request("bob", "x", base64_encode("P6\n1 1\n255\nabc")));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_code(r), "bad_image_format");

  r = s.verify(request("bob", "x", std::string(100 * 1024, 'A')));
  EXPECT_EQ(r.status, 413);
  EXPECT_EQ(error_code(r), "image_too_large");

  // text alone still gets a text label
  r = s.verify(request("carol", "happy joy", ""));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body).at("reason"), "no image");
}

TEST(ServiceHandlers, HistoryIsOrderedPerSession) {
  Service s(ServiceConfig{});
  install_fixture_models(s);
  for (const char* t : {"happy", "sad", "wow"}) s.verify(request("a", t, ""));
  s.verify(request("b", "angry", ""));
  const auto h = json::parse(s.history("a").body);
  ASSERT_EQ(h.at("messages").size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(h.at("messages")[i].at("message_id"), i + 1);
  EXPECT_EQ(h.at("messages")[1].at("text_label"), "Sadness");
  EXPECT_TRUE(json::parse(s.history("nobody").body).at("messages").empty());
  EXPECT_EQ(s.sessions().session_count(), 2u);
}

TEST(ServiceHandlers, RecordLogFile) {
  const auto dir = test::temp_dir("svclog");
  ServiceConfig cfg;
  cfg.log_path = dir / "verify.log";
  {
    Service s(cfg);
    install_fixture_models(s);
    s.verify(request("z", "happy", ""));
    s.verify(request("z", "sad", ""));
  }
  std::ifstream in(cfg.log_path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].rfind("session_id=z ", 0), 0u);
  EXPECT_NE(lines[1].find("message_id=2"), std::string::npos);
}

TEST(SessionStore, ConcurrentAppendsKeepEveryMessage) {
  Service s(ServiceConfig{});
  install_fixture_models(s);
  constexpr int kThreads = 10, kPerThread = 10;
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < kPerThread; ++i)
        s.verify(request("shared", (t % 2 ? "so sad" : "happy joy"), i == 0 ? happy_b64() : ""));
    });
  for (auto& th : threads) th.join();
  const auto h = s.sessions().history("shared");
  ASSERT_EQ(h.size(), static_cast<std::size_t>(kThreads * kPerThread));
  for (std::size_t i = 0; i < h.size(); ++i) ASSERT_EQ(h[i].message_id, i + 1);
}

class LiveServer : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig cfg;
    cfg.port = 0;
    service_ = std::make_unique<Service>(cfg);
    install_fixture_models(*service_);
    server_ = std::make_unique<HttpServer>(*service_);
    port_ = server_->bind();
    thread_ = std::thread([this] { server_->listen(); });
    server_->wait_until_ready();
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  std::unique_ptr<Service> service_;
  std::unique_ptr<HttpServer> server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(LiveServer, EndpointsOverHttp) {
  httplib::Client cli("127.0.0.1", port_);
  auto res = cli.Get("/api/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  res = cli.Post("/api/v1/verify", request("web", "so sad and lonely today", happy_b64()), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(json::parse(res->body).at("verdict"), "Liar");
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");

  res = cli.Post("/api/v1/verify", request("web", "great happy day", happy_b64()), "application/json");
  EXPECT_EQ(json::parse(res->body).at("verdict"), "Honest");

  res = cli.Post("/api/v1/verify", "{oops", "application/json");
  EXPECT_EQ(res->status, 400);

  res = cli.Get("/api/v1/sessions/web/history");
  ASSERT_TRUE(res);
  const auto h = json::parse(res->body);
  ASSERT_EQ(h.at("messages").size(), 2u);
  EXPECT_EQ(h.at("messages")[0].at("verdict"), "Liar");

  res = cli.Options("/api/v1/verify");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(cli.Get("/nowhere")->status, 404);
}

TEST_F(LiveServer, ConcurrentClients) {
  constexpr int kClients = 100;
  std::vector<std::thread> threads;
  std::vector<int> statuses(kClients, 0);
  for (int i = 0; i < kClients; ++i)
    threads.emplace_back([&, i] {
      httplib::Client cli("127.0.0.1", port_);
      auto res = cli.Post("/api/v1/verify", request("room", "happy joy", ""), "application/json");
      statuses[static_cast<std::size_t>(i)] = res ? res->status : -1;
    });
  for (auto& t : threads) t.join();
  for (int st : statuses) ASSERT_EQ(st, 200);
  const auto h = service_->sessions().history("room");
  ASSERT_EQ(h.size(), static_cast<std::size_t>(kClients));
  std::set<std::uint64_t> ids;
  for (std::size_t i = 0; i < h.size(); ++i) {
    ASSERT_EQ(h[i].message_id, i + 1);
    ids.insert(h[i].message_id);
  }
  EXPECT_EQ(ids.size(), static_cast<std::size_t>(kClients));
}
