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

#include "liesensor/corpus/emotion.hpp"

#include <algorithm>
#include <cctype>

namespace liesensor {

namespace {
constexpr std::array<std::string_view, kEmotionCount> kNames = {"Happiness", "Sadness",
                                                                "Surprise", "Hate"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}
}  // namespace

std::string_view to_string(EmotionLabel label) { return kNames[index_of(label)]; }

std::optional<EmotionLabel> parse_emotion(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (iequals(name, kNames[i])) return label_at(i);
  }
  return std::nullopt;
}

std::optional<EmotionLabel> emotion_from_code(int code) {
  if (code < 0 || code >= static_cast<int>(kEmotionCount)) return std::nullopt;
  return label_at(static_cast<std::size_t>(code));
}

EmotionLabel argmax_label(const EmotionScores& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kEmotionCount; ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return label_at(best);
}

}  // namespace liesensor
