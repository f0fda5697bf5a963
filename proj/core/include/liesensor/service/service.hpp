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

#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "liesensor/cnn/network.hpp"
#include "liesensor/service/config.hpp"
#include "liesensor/textclf/bundle.hpp"
#include "liesensor/verifier/verifier.hpp"
#include "liesensor/vision/cascade.hpp"

namespace liesensor::service {

/// Strict RFC 4648 base64 (padding required, no whitespace). Returns
/// nullopt on any invalid input.
std::optional<std::string> base64_decode(std::string_view text);
std::string base64_encode(std::string_view bytes);

/// In-memory session logs. Appends are atomic: each gets the next
/// per-session message id (starting at 1) under the session's lock.
class SessionStore {
 public:
  /// `log_path` empty disables persistence; otherwise every append is also
  /// written as `session_id=<id> <record>` to the file.
  explicit SessionStore(const std::filesystem::path& log_path = {});

  verifier::VerificationResult append(const std::string& session_id,
                                      verifier::VerificationResult result);
  /// Empty for unknown sessions.
  std::vector<verifier::VerificationResult> history(const std::string& session_id) const;
  std::size_t session_count() const;

 private:
  struct Session {
    std::mutex mu;
    std::vector<verifier::VerificationResult> log;
  };
  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> find_or_create(const std::string& id);

  mutable std::mutex map_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex log_mu_;
  std::ofstream log_;
};

struct Response {
  int status = 200;
  std::string body;  // JSON
};

/// Loaded models plus the endpoint logic, independent of the HTTP layer.
class Service {
 public:
  explicit Service(ServiceConfig config);

  /// Loads bundle, weights and cascade from the configured paths. Throws on
  /// any failure (the service must not start half-loaded).
  void load_models();
  /// Installs already loaded models (tests, embedding).
  void set_models(textclf::TextBundle bundle, cnn::Network network, vision::Cascade cascade);
  bool ready() const { return ready_.load(); }

  Response health() const;
  Response verify(std::string_view body);
  Response history(const std::string& session_id) const;

  const ServiceConfig& config() const { return config_; }
  SessionStore& sessions() { return sessions_; }

 private:
  ServiceConfig config_;
  std::unique_ptr<textclf::TextBundle> bundle_;
  std::unique_ptr<cnn::Network> network_;
  std::unique_ptr<vision::Cascade> cascade_;
  std::string network_version_;
  std::string cascade_version_;
  std::atomic<bool> ready_{false};
  SessionStore sessions_;
};

/// Blocking HTTP server over a Service. stop() may be called from another
/// thread.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to config address/port (port 0 picks a free port) and returns
  /// the bound port. Throws Error when binding fails.
  int bind();
  /// Serves until stop(); requires bind() first.
  void listen();
  void stop();
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace liesensor::service
