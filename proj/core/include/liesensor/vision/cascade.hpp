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
#include <string>
#include <string_view>
#include <vector>

namespace liesensor::vision {

struct HaarRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double weight = 0.0;

  friend bool operator==(const HaarRect&, const HaarRect&) = default;
};

/// Decision stump over one Haar feature: value < threshold picks left_value.
struct WeakClassifier {
  std::vector<HaarRect> rects;  // 1..3
  double threshold = 0.0;
  double left_value = 0.0;
  double right_value = 0.0;

  friend bool operator==(const WeakClassifier&, const WeakClassifier&) = default;
};

struct CascadeStage {
  double threshold = 0.0;
  std::vector<WeakClassifier> weak;

  friend bool operator==(const CascadeStage&, const CascadeStage&) = default;
};

struct Cascade {
  int window_w = 0;
  int window_h = 0;
  std::vector<CascadeStage> stages;

  std::size_t weak_count() const;

  /// Throws DataError if any rect leaves the window, a stage is empty or a
  /// classifier has no/too many rects.
  void validate() const;

  friend bool operator==(const Cascade&, const Cascade&) = default;
};

/// Parses either XML cascade dialect:
///  - old style: <size>, <stages>/<_>/<trees>/<_>/<_> with inline
///    <feature><rects>, <threshold>, <left_val>, <right_val>, <stage_threshold>
///  - new style: <cascade> with <width>/<height>, <stages> of
///    <weakClassifiers> (<internalNodes>, <leafValues>) and a shared <features> table.
/// Only stump classifiers over upright features are accepted; errors name the
/// offending element path.
Cascade parse_cascade(std::string_view xml);
Cascade load_cascade(const std::filesystem::path& path);

/// Writes the old-style dialect with round-trip exact reals.
std::string serialize_cascade(const Cascade& cascade, std::string_view name = "cascade");
void save_cascade(const Cascade& cascade, const std::filesystem::path& path);

}  // namespace liesensor::vision
