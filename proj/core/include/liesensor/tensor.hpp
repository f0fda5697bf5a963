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
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "liesensor/error.hpp"

namespace liesensor {

/// Dense row-major real tensor of rank 1..4. Images use NHWC.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, double fill = 0.0)
      : shape(std::move(s)), data(element_count(shape), fill) {}

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    if (s.empty()) return 0;
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t rank() const { return shape.size(); }
  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  double& operator[](std::size_t i) { return data[i]; }
  const double& operator[](std::size_t i) const { return data[i]; }

  /// NHWC accessors; only meaningful for rank 4.
  double& at(std::size_t n, std::size_t y, std::size_t x, std::size_t c) {
    return data[((n * shape[1] + y) * shape[2] + x) * shape[3] + c];
  }
  const double& at(std::size_t n, std::size_t y, std::size_t x, std::size_t c) const {
    return data[((n * shape[1] + y) * shape[2] + x) * shape[3] + c];
  }

  std::string shape_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(shape[i]);
    }
    return out + ")";
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

}  // namespace liesensor
