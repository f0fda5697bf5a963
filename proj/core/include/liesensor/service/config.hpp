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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace liesensor::service {

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::filesystem::path bundle_path;
  std::filesystem::path weights_path;
  std::filesystem::path cascade_path;
  std::size_t max_image_bytes = 4u << 20;
  int request_timeout_s = 10;
  /// Append-only record log of every verification; disabled when empty.
  std::filesystem::path log_path;
};

/// Looks up an environment variable; returns nullptr when unset.
using EnvLookup = std::function<const char*(const char*)>;

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// ignored; unknown keys and malformed values throw DataError naming the line.
ServiceConfig parse_config(std::string_view text);

/// Every key may be overridden by LIESENSOR_<KEY> (upper case), e.g.
/// LIESENSOR_PORT=9000.
void apply_env_overrides(ServiceConfig& config, const EnvLookup& env);

/// parse_config(file) + apply_env_overrides(std::getenv) + relative model
/// paths resolved against the config file's directory.
ServiceConfig load_config(const std::filesystem::path& path);
ServiceConfig load_config(const std::filesystem::path& path, const EnvLookup& env);

}  // namespace liesensor::service
