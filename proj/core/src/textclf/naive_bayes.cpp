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

#include <cmath>
#include <string>

#include "liesensor/error.hpp"
#include "liesensor/textclf/models.hpp"

namespace liesensor::textclf {

NaiveBayesModel train_naive_bayes(std::span<const SparseVector> X,
                                  std::span<const EmotionLabel> y, double alpha) {
  if (X.empty() || X.size() != y.size()) {
    throw InvalidArgument("naive bayes: need |X| == |y| > 0");
  }
  if (!(alpha > 0.0)) throw InvalidArgument("naive bayes: alpha must be > 0");
  const std::size_t dim = X[0].dimension;
  if (dim == 0) throw InvalidArgument("naive bayes: zero-dimensional features");

  std::array<std::vector<double>, kEmotionCount> term_counts;
  for (auto& row : term_counts) row.assign(dim, 0.0);
  std::array<std::size_t, kEmotionCount> class_docs{};
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].dimension != dim) {
      throw ShapeError("naive bayes: sample " + std::to_string(i) + " has dimension " +
                       std::to_string(X[i].dimension) + ", expected " + std::to_string(dim));
    }
    const std::size_t c = index_of(y[i]);
    ++class_docs[c];
    for (const auto& [t, value] : X[i].entries) {
      if (value < 0.0) throw InvalidArgument("naive bayes: negative feature value");
      term_counts[c][t] += value;
    }
  }
  for (std::size_t c = 0; c < kEmotionCount; ++c) {
    if (class_docs[c] == 0) {
      throw InvalidArgument("naive bayes: class with zero examples (" +
                            std::string(to_string(label_at(c))) + ")");
    }
  }

  NaiveBayesModel model;
  model.alpha = alpha;
  const double n = static_cast<double>(X.size());
  for (std::size_t c = 0; c < kEmotionCount; ++c) {
    model.class_log_prior[c] = std::log(static_cast<double>(class_docs[c]) / n);
    double class_total = 0.0;
    for (double v : term_counts[c]) class_total += v;
    const double denom = std::log(class_total + alpha * static_cast<double>(dim));
    auto& row = model.log_likelihood[c];
    row.resize(dim);
    for (std::size_t t = 0; t < dim; ++t) row[t] = std::log(term_counts[c][t] + alpha) - denom;
  }
  return model;
}

EmotionScores NaiveBayesModel::joint_log_likelihood(const SparseVector& x) const {
  EmotionScores jll = class_log_prior;
  for (std::size_t c = 0; c < kEmotionCount; ++c) {
    for (const auto& [t, value] : x.entries) jll[c] += value * log_likelihood[c][t];
  }
  return jll;
}

}  // namespace liesensor::textclf
