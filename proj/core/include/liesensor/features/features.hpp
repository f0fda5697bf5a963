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
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "liesensor/textprep/textprep.hpp"

namespace liesensor::features {

/// Sparse real vector with strictly increasing indices and no stored zeros.
struct SparseVector {
  using Entry = std::pair<std::uint32_t, double>;

  std::size_t dimension = 0;
  std::vector<Entry> entries;

  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dimension(dim) {}

  /// Builds from arbitrary (index, value) pairs: sorts, merges duplicate
  /// indices by summing, and drops zeros. Throws ShapeError for indices
  /// >= dimension.
  static SparseVector from_pairs(std::size_t dimension, std::vector<Entry> pairs);

  /// Builds from a dense array, dropping zeros.
  static SparseVector from_dense(std::span<const double> dense);

  bool empty() const { return entries.empty(); }
  double l2_norm() const;
  double dot(std::span<const double> dense) const;
  std::vector<double> to_dense() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

/// Smoothed inverse document frequencies: idf_i = ln((1+N)/(1+df_i)) + 1.
struct IdfTable {
  std::vector<double> idf;
  std::uint64_t doc_count = 0;

  std::size_t dimension() const { return idf.size(); }
  friend bool operator==(const IdfTable&, const IdfTable&) = default;
};

enum class FeatureKind : std::uint8_t { Count = 0, Tfidf = 1 };

std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view name);

/// Per-term occurrence counts; out-of-vocabulary tokens are ignored.
SparseVector count_vectorize(const textprep::TokenizedDoc& doc, const textprep::Vocabulary& vocab);

/// Document frequencies are taken over `docs`. Throws InvalidArgument on an
/// empty corpus.
IdfTable fit_idf(std::span<const textprep::TokenizedDoc> docs, const textprep::Vocabulary& vocab);

/// count_i * idf_i, then L2-normalized. A document with no in-vocabulary
/// token yields the zero vector. Throws ShapeError when the IDF table and
/// vocabulary disagree in size.
SparseVector tfidf_vectorize(const textprep::TokenizedDoc& doc, const textprep::Vocabulary& vocab,
                             const IdfTable& idf);

/// Vocabulary plus the feature recipe applied at training and prediction.
struct FeatureSpace {
  textprep::Vocabulary vocab;
  FeatureKind kind = FeatureKind::Count;
  std::optional<IdfTable> idf;  // present iff kind == Tfidf

  std::size_t dimension() const { return vocab.size(); }
  SparseVector transform(const textprep::TokenizedDoc& doc) const;
  std::vector<SparseVector> transform_all(std::span<const textprep::TokenizedDoc> docs) const;

  /// Builds vocabulary (and IDF when requested) from a training corpus.
  static FeatureSpace fit(std::span<const textprep::TokenizedDoc> docs, FeatureKind kind,
                          std::uint64_t min_count);
};

}  // namespace liesensor::features
