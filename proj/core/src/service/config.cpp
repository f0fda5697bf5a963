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

#include "liesensor/service/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "liesensor/binary_io.hpp"
#include "liesensor/error.hpp"

namespace liesensor::service {

namespace {

constexpr const char* kKeys[] = {"bind_address",   "port",          "bundle_path",
                                 "weights_path",   "cascade_path",  "max_image_bytes",
                                 "request_timeout_s", "log_path"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view v, T lo, T hi, const std::string& where) {
  T out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || out < lo || out > hi) {
    throw DataError(where + ": invalid value '" + std::string(v) + "'");
  }
  return out;
}

void set_key(ServiceConfig& c, std::string_view key, std::string_view value, const std::string& where) {
  if (key == "bind_address") {
    if (value.empty()) throw DataError(where + ": bind_address is empty");
    c.bind_address = value;
  } else if (key == "port") {
    c.port = parse_number<int>(value, 0, 65535, where);
  } else if (key == "bundle_path") {
    c.bundle_path = std::string(value);
  } else if (key == "weights_path") {
    c.weights_path = std::string(value);
  } else if (key == "cascade_path") {
    c.cascade_path = std::string(value);
  } else if (key == "max_image_bytes") {
    c.max_image_bytes = parse_number<std::size_t>(value, 1, std::size_t{1} << 30, where);
  } else if (key == "request_timeout_s") {
    c.request_timeout_s = parse_number<int>(value, 1, 3600, where);
  } else if (key == "log_path") {
    c.log_path = std::string(value);
  } else {
    throw DataError(where + ": unknown key '" + std::string(key) + "'");
  }
}

}  // namespace

ServiceConfig parse_config(std::string_view text) {
  ServiceConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string where = "config line " + std::to_string(n);
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw DataError(where + ": expected key=value");
    set_key(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), where);
  }
  return c;
}

void apply_env_overrides(ServiceConfig& config, const EnvLookup& env) {
  for (const char* key : kKeys) {
    std::string var = "LIESENSOR_";
    for (const char* p = key; *p; ++p) var += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    if (const char* v = env(var.c_str())) set_key(config, key, trim(v), "environment " + var);
  }
}

ServiceConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
  ServiceConfig c;
  try {
    c = parse_config(binary::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  apply_env_overrides(c, env);
  const auto base = path.parent_path();
  for (auto* p : {&c.bundle_path, &c.weights_path, &c.cascade_path, &c.log_path}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  return load_config(path, [](const char* name) { return std::getenv(name); });
}

}  // namespace liesensor::service
