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

#include "liesensor/service/service.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <cstdio>
#include <random>

#include "httplib.h"
#include "liesensor/binary_io.hpp"
#include "liesensor/error.hpp"
#include "liesensor/vision/image.hpp"

namespace liesensor::service {

namespace {

using json = nlohmann::ordered_json;

Response error_response(int status, std::string_view code, std::string_view message) {
  json j;
  j["error"] = {{"code", code}, {"message", message}};
  return {status, j.dump()};
}

std::string opaque_id() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
  return buf;
}

bool blank(std::string_view s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_b64_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/';
}

}  // namespace

std::optional<std::string> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) return std::nullopt;
  if (text.empty()) return std::string();
  std::size_t pad = 0;
  if (text.back() == '=') ++pad;
  if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
  for (std::size_t i = 0; i < text.size() - pad; ++i) {
    if (!is_b64_char(text[i])) return std::nullopt;
  }
  std::string out(text.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0 || static_cast<std::size_t>(n) != out.size()) return std::nullopt;
  out.resize(out.size() - pad);
  return out;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

// ------------------------------------------------------------ SessionStore

SessionStore::SessionStore(const std::filesystem::path& log_path) {
  if (!log_path.empty()) {
    log_.open(log_path, std::ios::app);
    if (!log_) throw Error("cannot open session log " + log_path.string());
  }
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(map_mu_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<SessionStore::Session> SessionStore::find_or_create(const std::string& id) {
  std::lock_guard lock(map_mu_);
  auto& slot = sessions_[id];
  if (!slot) slot = std::make_shared<Session>();
  return slot;
}

verifier::VerificationResult SessionStore::append(const std::string& session_id,
                                                  verifier::VerificationResult result) {
  const auto session = find_or_create(session_id);
  {
    std::lock_guard lock(session->mu);
    result.message_id = session->log.size() + 1;
    session->log.push_back(result);
  }
  if (log_.is_open()) {
    std::lock_guard lock(log_mu_);
    log_ << "session_id=" << session_id << ' ' << result.to_record() << '\n';
    log_.flush();
  }
  return result;
}

std::vector<verifier::VerificationResult> SessionStore::history(const std::string& session_id) const {
  const auto session = find(session_id);
  if (!session) return {};
  std::lock_guard lock(session->mu);
  return session->log;
}

std::size_t SessionStore::session_count() const {
  std::lock_guard lock(map_mu_);
  return sessions_.size();
}

// ------------------------------------------------------------ Service

Service::Service(ServiceConfig config) : config_(std::move(config)), sessions_(config_.log_path) {}

void Service::load_models() {
  auto bundle = textclf::load_bundle(config_.bundle_path);
  auto network = cnn::load_weights(config_.weights_path);
  auto cascade = vision::load_cascade(config_.cascade_path);
  set_models(std::move(bundle), std::move(network), std::move(cascade));
}

void Service::set_models(textclf::TextBundle bundle, cnn::Network network, vision::Cascade cascade) {
  if (network.class_count() != kEmotionCount) throw ShapeError("service: face network must have 4 classes");
  network.set_mode(cnn::Mode::Eval);
  char crc[16];
  std::snprintf(crc, sizeof crc, "%08x", binary::crc32(cnn::encode_weights(network)));
  network_version_ = std::string("cnn-weights-v") + std::to_string(cnn::kWeightFormatVersion) + ":" + crc;
  cascade_version_ = "cascade:" + std::to_string(cascade.window_w) + "x" + std::to_string(cascade.window_h) +
                     ":" + std::to_string(cascade.stages.size()) + "stages:" +
                     std::to_string(cascade.weak_count()) + "weak";
  bundle_ = std::make_unique<textclf::TextBundle>(std::move(bundle));
  network_ = std::make_unique<cnn::Network>(std::move(network));
  cascade_ = std::make_unique<vision::Cascade>(std::move(cascade));
  ready_ = true;
}

Response Service::health() const {
  if (!ready()) return {503, json{{"status", "initializing"}}.dump()};
  json j;
  j["status"] = "ok";
  j["model_versions"] = {{"text_bundle", bundle_->version},
                         {"face_network", network_version_},
                         {"cascade", cascade_version_}};
  return {200, j.dump()};
}

Response Service::verify(std::string_view body) {
  if (!ready()) return error_response(503, "not_ready", "models are still loading");
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error&) {
    return error_response(400, "bad_json", "request body is not valid JSON");
  }
  if (!req.is_object()) return error_response(400, "bad_json", "request body must be a JSON object");
  const auto field = [&](const char* name) -> std::optional<std::string> {
    const auto it = req.find(name);
    if (it == req.end() || it->is_null()) return std::string();
    if (!it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };
  const auto session_id = field("session_id");
  const auto text = field("text");
  const auto image_b64 = field("image_pgm_b64");
  if (!session_id || !text || !image_b64) {
    return error_response(400, "bad_json", "session_id, text and image_pgm_b64 must be strings");
  }
  if (session_id->empty()) return error_response(400, "bad_json", "session_id is required");

  if (image_b64->size() / 4 * 3 > config_.max_image_bytes + 2) {
    return error_response(413, "image_too_large",
                          "image exceeds " + std::to_string(config_.max_image_bytes) + " bytes");
  }
  if (blank(*text) && image_b64->empty()) {
    return error_response(422, "empty_message", "both text and image are empty");
  }

  std::optional<vision::GrayImage> image;
  if (!image_b64->empty()) {
    const auto raw = base64_decode(*image_b64);
    if (!raw) return error_response(400, "bad_image_encoding", "image_pgm_b64 is not valid base64");
    if (raw->size() > config_.max_image_bytes) {
      return error_response(413, "image_too_large",
                            "image exceeds " + std::to_string(config_.max_image_bytes) + " bytes");
    }
    try {
      image = vision::decode_pgm(*raw);
    } catch (const DataError& e) {
      return error_response(400, "bad_image_format", e.what());
    }
  }

  try {
    verifier::ModelSet models{bundle_.get(), network_.get(), cascade_.get(), {}};
    auto result = verifier::verify_message(*text, image ? &*image : nullptr, models);
    result = sessions_.append(*session_id, std::move(result));
    json j = result.to_json();
    j["session_id"] = *session_id;
    return {200, j.dump()};
  } catch (const std::exception& e) {
    const std::string id = opaque_id();
    spdlog::error("verify failed [{}]: {}", id, e.what());
    json j;
    j["error"] = {{"code", "internal"}, {"id", id}};
    return {500, j.dump()};
  }
}

Response Service::history(const std::string& session_id) const {
  json items = json::array();
  for (const auto& r : sessions_.history(session_id)) items.push_back(r.to_json());
  json j;
  j["session_id"] = session_id;
  j["messages"] = std::move(items);
  return {200, j.dump()};
}

// ------------------------------------------------------------ HttpServer

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  explicit Impl(Service& s) : service(s) {}
};

namespace {
void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}
}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  Service& s = impl_->service;
  const auto& cfg = s.config();
  svr.set_read_timeout(cfg.request_timeout_s, 0);
  svr.set_write_timeout(cfg.request_timeout_s, 0);
  // base64 inflates by 4/3; leave headroom for the JSON envelope and text.
  svr.set_payload_max_length(cfg.max_image_bytes / 3 * 4 + (1u << 20));
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});

  svr.Post("/api/v1/verify", [&s](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.verify(req.body));
  });
  svr.Get(R"(/api/v1/sessions/([^/]+)/history)",
          [&s](const httplib::Request& req, httplib::Response& res) {
            reply(res, s.history(req.matches[1]));
          });
  svr.Get("/api/v1/health", [&s](const httplib::Request&, httplib::Response& res) {
    reply(res, s.health());
  });
  svr.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    const std::string id = opaque_id();
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      spdlog::error("unhandled [{}]: {}", id, e.what());
    } catch (...) {
      spdlog::error("unhandled [{}]: unknown exception", id);
    }
    res.status = 500;
    res.set_content(json{{"error", {{"code", "internal"}, {"id", id}}}}.dump(), "application/json");
  });
  svr.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {}", req.method, req.path, res.status);
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  const auto& cfg = impl_->service.config();
  int port = cfg.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(cfg.bind_address);
  } else if (!impl_->server.bind_to_port(cfg.bind_address, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error("cannot bind " + cfg.bind_address + ":" + std::to_string(cfg.port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace liesensor::service
