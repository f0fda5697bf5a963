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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "liesensor/cnn/network.hpp"
#include "liesensor/corpus/emotion.hpp"
#include "liesensor/textclf/bundle.hpp"
#include "liesensor/vision/cascade.hpp"
#include "liesensor/vision/detect.hpp"

namespace liesensor::verifier {

enum class Verdict : std::uint8_t { Honest = 0, Liar = 1 };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

/// Honest iff the labels are equal.
constexpr Verdict compare_labels(EmotionLabel face, EmotionLabel text) {
  return face == text ? Verdict::Honest : Verdict::Liar;
}

inline constexpr std::string_view kNoFace = "no face";
inline constexpr std::string_view kNoTextSignal = "no text signal";
inline constexpr std::string_view kNoImage = "no image";

struct VerificationResult {
  std::optional<EmotionLabel> text_label;
  EmotionScores text_scores{};
  std::optional<EmotionLabel> face_label;
  EmotionScores face_scores{};
  std::optional<vision::BoundingBox> face_box;
  /// Absent when either channel produced no label; `reasons` says why.
  std::optional<Verdict> verdict;
  std::vector<std::string> reasons;
  /// ISO-8601 UTC, millisecond precision.
  std::string timestamp;
  std::uint64_t message_id = 0;

  /// Reasons joined with "; ", empty when a verdict exists.
  std::string reason() const;

  /// Single-line `field=value` record; values containing spaces are
  /// double-quoted and absent fields are written as `-`.
  std::string to_record() const;
  nlohmann::ordered_json to_json() const;
};

std::string utc_timestamp_now();

/// Models used for one verification; all are only read.
struct ModelSet {
  const textclf::TextBundle* text = nullptr;
  const cnn::Network* face = nullptr;
  const vision::Cascade* cascade = nullptr;
  vision::DetectParams detect;
};

/// Text channel: preprocess -> features -> classifier. Face channel: detect
/// the largest face, resample it to the network input size, classify. The
/// verdict compares the two labels; a channel without a label adds its
/// reason ("no text signal", "no image", "no face") instead.
VerificationResult verify_message(std::string_view text, const vision::GrayImage* image,
                                  const ModelSet& models);

struct EvalCase {
  std::optional<Verdict> predicted;
  Verdict truth = Verdict::Honest;
};

/// Confusion counts with Liar as the positive class. Cases without a
/// predicted verdict are excluded and counted in `excluded`.
struct EvalReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t excluded = 0;
  std::optional<double> precision;  // tp / (tp + fp) when defined
  std::optional<double> recall;     // tp / (tp + fn) when defined

  std::size_t scored() const { return tp + fp + fn + tn; }
  nlohmann::ordered_json to_json() const;
};

/// Throws InvalidArgument on an empty list.
EvalReport evaluate(std::span<const EvalCase> cases);

}  // namespace liesensor::verifier
