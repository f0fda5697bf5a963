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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace liesensor {

/// The four emotions both channels predict. The integer values are the
/// serialized encoding and must never change.
enum class EmotionLabel : std::uint8_t {
  Happiness = 0,
  Sadness = 1,
  Surprise = 2,
  Hate = 3,
};

inline constexpr std::size_t kEmotionCount = 4;

inline constexpr std::array<EmotionLabel, kEmotionCount> kAllEmotions = {
    EmotionLabel::Happiness, EmotionLabel::Sadness, EmotionLabel::Surprise,
    EmotionLabel::Hate};

constexpr std::size_t index_of(EmotionLabel label) {
  return static_cast<std::size_t>(label);
}

constexpr EmotionLabel label_at(std::size_t index) {
  return static_cast<EmotionLabel>(index);
}

std::string_view to_string(EmotionLabel label);

/// Accepts the canonical names ("Happiness", ...) case-insensitively.
std::optional<EmotionLabel> parse_emotion(std::string_view name);

/// Accepts the integer encoding 0..3.
std::optional<EmotionLabel> emotion_from_code(int code);

/// Per-label scores, indexed by the integer encoding.
using EmotionScores = std::array<double, kEmotionCount>;

/// Index of the maximum score; ties go to the lowest label index.
EmotionLabel argmax_label(const EmotionScores& scores);

}  // namespace liesensor
