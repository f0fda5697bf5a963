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

#include "liesensor/features/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liesensor/error.hpp"

namespace liesensor::features {

SparseVector SparseVector::from_pairs(std::size_t dimension, std::vector<Entry> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  SparseVector v(dimension);
  for (const auto& [index, value] : pairs) {
    if (index >= dimension) {
      throw ShapeError("sparse index " + std::to_string(index) + " >= dimension " +
                       std::to_string(dimension));
    }
    if (!v.entries.empty() && v.entries.back().first == index) {
      v.entries.back().second += value;
    } else {
      v.entries.emplace_back(index, value);
    }
  }
  std::erase_if(v.entries, [](const Entry& e) { return e.second == 0.0; });
  return v;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector v(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) v.entries.emplace_back(static_cast<std::uint32_t>(i), dense[i]);
  }
  return v;
}

double SparseVector::l2_norm() const {
  double sum = 0.0;
  for (const auto& [i, value] : entries) sum += value * value;
  return std::sqrt(sum);
}

double SparseVector::dot(std::span<const double> dense) const {
  double sum = 0.0;
  for (const auto& [i, value] : entries) sum += value * dense[i];
  return sum;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dimension, 0.0);
  for (const auto& [i, value] : entries) out[i] = value;
  return out;
}

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::Count ? "count" : "tfidf";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view name) {
  if (name == "count") return FeatureKind::Count;
  if (name == "tfidf") return FeatureKind::Tfidf;
  return std::nullopt;
}

SparseVector count_vectorize(const textprep::TokenizedDoc& doc,
                             const textprep::Vocabulary& vocab) {
  std::vector<SparseVector::Entry> pairs;
  pairs.reserve(doc.tokens.size());
  for (const auto& token : doc.tokens) {
    if (const auto index = vocab.index_of(token)) {
      pairs.emplace_back(static_cast<std::uint32_t>(*index), 1.0);
    }
  }
  return SparseVector::from_pairs(vocab.size(), std::move(pairs));
}

IdfTable fit_idf(std::span<const textprep::TokenizedDoc> docs,
                 const textprep::Vocabulary& vocab) {
  if (docs.empty()) throw InvalidArgument("fit_idf: empty corpus");
  std::vector<std::uint64_t> df(vocab.size(), 0);
  std::vector<std::size_t> last_seen(vocab.size(), SIZE_MAX);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& token : docs[d].tokens) {
      const auto index = vocab.index_of(token);
      if (index && last_seen[*index] != d) {
        last_seen[*index] = d;
        ++df[*index];
      }
    }
  }
  IdfTable table;
  table.doc_count = docs.size();
  table.idf.resize(vocab.size());
  const double n = static_cast<double>(docs.size());
  for (std::size_t i = 0; i < df.size(); ++i) {
    table.idf[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  }
  return table;
}

SparseVector tfidf_vectorize(const textprep::TokenizedDoc& doc, const textprep::Vocabulary& vocab,
                             const IdfTable& idf) {
  if (idf.dimension() != vocab.size()) {
    throw ShapeError("tfidf: idf dimension " + std::to_string(idf.dimension()) +
                     " != vocabulary size " + std::to_string(vocab.size()));
  }
  SparseVector v = count_vectorize(doc, vocab);
  for (auto& [i, value] : v.entries) value *= idf.idf[i];
  const double norm = v.l2_norm();
  if (norm > 0.0) {
    for (auto& [i, value] : v.entries) value /= norm;
  }
  return v;
}

SparseVector FeatureSpace::transform(const textprep::TokenizedDoc& doc) const {
  if (kind == FeatureKind::Tfidf) {
    if (!idf) throw InvalidArgument("tfidf feature space without an idf table");
    return tfidf_vectorize(doc, vocab, *idf);
  }
  return count_vectorize(doc, vocab);
}

std::vector<SparseVector> FeatureSpace::transform_all(
    std::span<const textprep::TokenizedDoc> docs) const {
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) out.push_back(transform(doc));
  return out;
}

FeatureSpace FeatureSpace::fit(std::span<const textprep::TokenizedDoc> docs, FeatureKind kind,
                               std::uint64_t min_count) {
  FeatureSpace space{textprep::Vocabulary::build(docs, min_count), kind, std::nullopt};
  if (kind == FeatureKind::Tfidf) space.idf = fit_idf(docs, space.vocab);
  return space;
}

}  // namespace liesensor::features
