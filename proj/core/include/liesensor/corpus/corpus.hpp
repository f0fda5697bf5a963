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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liesensor/corpus/emotion.hpp"

namespace liesensor::corpus {

inline constexpr int kFerSide = 48;
inline constexpr std::size_t kFerPixels = 48 * 48;

struct LabeledImage {
  std::array<std::uint8_t, kFerPixels> pixels{};
  EmotionLabel label = EmotionLabel::Happiness;
};

struct LabeledText {
  std::string id;
  std::optional<std::string> author;
  std::string content;
  EmotionLabel label = EmotionLabel::Happiness;
};

struct RecordError {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string reason;
};

/// Accounting for one file load: kept + dropped + errors == total data rows.
struct LoadReport {
  std::size_t total_rows = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped_by_label;
  std::vector<RecordError> errors;

  std::size_t dropped() const;
  std::string to_json() const;
};

template <typename T>
struct Loaded {
  std::vector<T> records;
  LoadReport report;
};

/// FER-2013 numeric code (0..6) to the 4-way space: 0 Angry -> Hate,
/// 3 Happy -> Happiness, 4 Sad -> Sadness, 5 Surprise -> Surprise; Disgust,
/// Fear and Neutral map to nullopt. Throws InvalidArgument outside 0..6.
std::optional<EmotionLabel> map_fer_label(int code);

/// Name of a FER code, for drop statistics ("disgust", "fear", ...).
std::string_view fer_code_name(int code);

/// Sentiment-name to label table used for the tweet corpus. Entries map a
/// lowercase raw name to a label or to "drop" (nullopt).
class LabelMap {
 public:
  /// The frozen 13-to-4 table.
  static LabelMap defaults();

  /// Reads `raw_name = TargetLabel | drop` lines ('#' starts a comment) and
  /// layers them over `base`. Throws DataError with the line number on bad
  /// syntax or an unknown target.
  static LabelMap with_overrides(const LabelMap& base, std::istream& in);
  static LabelMap with_overrides(const LabelMap& base,
                                 const std::filesystem::path& path);

  /// Unknown names map to nullopt.
  std::optional<EmotionLabel> map(std::string_view raw) const;

  void set(std::string raw, std::optional<EmotionLabel> target);

  const std::map<std::string, std::optional<EmotionLabel>, std::less<>>&
  entries() const {
    return table_;
  }

 private:
  std::map<std::string, std::optional<EmotionLabel>, std::less<>> table_;
};

/// Maps via the default table (total function).
std::optional<EmotionLabel> map_text_label(std::string_view raw);

/// Loads a FER-format CSV (`emotion,pixels[,Usage]`). Rows with excluded
/// labels are dropped and counted; malformed rows are recorded in the
/// report. A missing file or missing header column throws DataError.
Loaded<LabeledImage> load_fer_csv(const std::filesystem::path& path);
Loaded<LabeledImage> load_fer_csv(std::istream& in);

/// Loads a tweet CSV with columns tweet_id, sentiment, author, content in
/// any order.
Loaded<LabeledText> load_tweet_csv(const std::filesystem::path& path,
                                   const LabelMap& labels = LabelMap::defaults());
Loaded<LabeledText> load_tweet_csv(std::istream& in,
                                   const LabelMap& labels = LabelMap::defaults());

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Stratified split of record positions. Each label present gets
/// round(fraction * n) training records, clamped to [1, n-1]; both index
/// lists come back in ascending order. Throws InvalidArgument when the
/// input is empty, the fraction is outside (0,1), or any present label has
/// fewer than 2 records ("cannot stratify").
SplitIndices split_indices(std::span<const EmotionLabel> labels, const SplitSpec& spec);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(std::span<const T> records,
                                                        const SplitSpec& spec) {
  std::vector<EmotionLabel> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  const SplitIndices idx = split_indices(labels, spec);
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(idx.train.size());
  out.second.reserve(idx.validation.size());
  for (std::size_t i : idx.train) out.first.push_back(records[i]);
  for (std::size_t i : idx.validation) out.second.push_back(records[i]);
  return out;
}

/// Stratified subset of at most `count` records (same per-label proportions).
template <typename T>
std::vector<T> stratified_subset(std::span<const T> records, std::size_t count,
                                 std::uint64_t seed) {
  if (count >= records.size()) return {records.begin(), records.end()};
  return split_dataset(
             records,
             SplitSpec{static_cast<double>(count) / static_cast<double>(records.size()), seed})
      .first;
}

}  // namespace liesensor::corpus
