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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "liesensor/corpus/corpus.hpp"
#include "liesensor/features/features.hpp"
#include "liesensor/textclf/models.hpp"

namespace liesensor::textclf {

/// Everything needed to classify a raw message: feature recipe, the chosen
/// classifier, and the validation table it was chosen from.
struct TextBundle {
  std::string version;
  features::FeatureSpace features;
  TextModel model;
  ModelSelection selection;

  /// Preprocesses and classifies raw text. Returns nullopt when the text
  /// has no in-vocabulary token (no signal to classify).
  std::optional<TextPrediction> predict(std::string_view raw_text) const;
};

/// Binary layout (all integers little-endian):
///
///   "LSTXTBND"  u32 format_version  str version  u32 section_count
///   section_count x { str name, u64 length, payload }
///   u32 crc32 of every preceding byte
///
/// where str is a u32 length followed by bytes and reals are 64-bit floats.
/// Sections: feature_kind, vocabulary, idf (tfidf only), selection, model.
std::string encode_bundle(const TextBundle& bundle);

/// Throws ChecksumError on a short or corrupted buffer and DataError on a
/// structurally invalid one.
TextBundle decode_bundle(std::string_view bytes);

void save_bundle(const TextBundle& bundle, const std::filesystem::path& path);
TextBundle load_bundle(const std::filesystem::path& path);

inline constexpr std::uint32_t kBundleFormatVersion = 1;

struct TextTrainingConfig {
  features::FeatureKind feature_kind = features::FeatureKind::Count;
  std::uint64_t min_count = 2;
  corpus::SplitSpec split{0.8, 42};
  double nb_alpha = 1.0;
  LinearHyper linear;
  ForestHyper forest;
};

struct TextTrainingResult {
  TextBundle bundle;
  /// All four trained candidates in tie-break order.
  std::vector<TextModel> candidates;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

/// Splits, preprocesses, fits the feature space on the training part,
/// trains all four classifiers and keeps the one with the best validation
/// accuracy.
TextTrainingResult train_text_pipeline(std::span<const corpus::LabeledText> records,
                                       const TextTrainingConfig& config);

/// Same, on an already split corpus.
TextTrainingResult train_text_pipeline(std::span<const corpus::LabeledText> train,
                                       std::span<const corpus::LabeledText> validation,
                                       const TextTrainingConfig& config);

}  // namespace liesensor::textclf
