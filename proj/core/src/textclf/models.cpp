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

#include "liesensor/textclf/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liesensor/error.hpp"

namespace liesensor::textclf {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr std::array<std::string_view, 4> kSelectionOrder = {
    "naive_bayes", "linear_svm", "logistic_regression", "random_forest"};
}  // namespace

EmotionScores softmax(const EmotionScores& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  EmotionScores out{};
  double sum = 0.0;
  for (std::size_t c = 0; c < kEmotionCount; ++c) {
    out[c] = std::exp(logits[c] - top);
    sum += out[c];
  }
  for (double& p : out) p /= sum;
  return out;
}

TextPrediction prediction_from_scores(const EmotionScores& scores) {
  return {argmax_label(scores), scores};
}

std::string_view model_name(const TextModel& model) {
  return std::visit(overloaded{
                        [](const NaiveBayesModel&) { return std::string_view("naive_bayes"); },
                        [](const LinearModel& m) {
                          return m.kind == LinearKind::Svm
                                     ? std::string_view("linear_svm")
                                     : std::string_view("logistic_regression");
                        },
                        [](const RandomForestModel&) { return std::string_view("random_forest"); },
                    },
                    model);
}

std::size_t model_dimension(const TextModel& model) {
  return std::visit(overloaded{
                        [](const NaiveBayesModel& m) { return m.dimension(); },
                        [](const LinearModel& m) { return m.dimension(); },
                        [](const RandomForestModel& m) { return m.dimension; },
                    },
                    model);
}

TextPrediction predict_text(const TextModel& model, const SparseVector& x) {
  if (x.dimension != model_dimension(model)) {
    throw ShapeError("predict_text: feature dimension " + std::to_string(x.dimension) +
                     " != model dimension " + std::to_string(model_dimension(model)) + " (" +
                     std::string(model_name(model)) + ")");
  }
  const EmotionScores scores = std::visit(
      overloaded{
          [&](const NaiveBayesModel& m) { return softmax(m.joint_log_likelihood(x)); },
          [&](const LinearModel& m) { return softmax(m.margins(x)); },
          [&](const RandomForestModel& m) {
            EmotionScores avg{};
            for (const auto& tree : m.trees) {
              const EmotionScores p = tree.predict(x);
              for (std::size_t c = 0; c < kEmotionCount; ++c) avg[c] += p[c];
            }
            for (double& p : avg) p /= static_cast<double>(m.trees.size());
            return avg;
          },
      },
      model);
  return prediction_from_scores(scores);
}

double accuracy(const TextModel& model, std::span<const SparseVector> X,
                std::span<const EmotionLabel> y) {
  if (X.empty() || X.size() != y.size()) throw InvalidArgument("accuracy: need |X| == |y| > 0");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (predict_text(model, X[i]).label == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(X.size());
}

std::size_t selection_rank(std::string_view name) {
  const auto it = std::find(kSelectionOrder.begin(), kSelectionOrder.end(), name);
  return static_cast<std::size_t>(it - kSelectionOrder.begin());
}

double ModelSelection::chosen_accuracy() const {
  for (const auto& [name, acc] : per_model_accuracy) {
    if (name == chosen) return acc;
  }
  throw InvalidArgument("model selection: chosen model missing from table");
}

ModelSelection choose_best(std::vector<std::pair<std::string, double>> accuracies) {
  if (accuracies.empty()) throw InvalidArgument("choose_best: no candidates");
  std::stable_sort(accuracies.begin(), accuracies.end(), [](const auto& a, const auto& b) {
    const auto ra = selection_rank(a.first), rb = selection_rank(b.first);
    return ra != rb ? ra < rb : a.first < b.first;
  });
  ModelSelection sel;
  std::size_t best = 0;
  for (std::size_t i = 1; i < accuracies.size(); ++i) {
    if (accuracies[i].second > accuracies[best].second) best = i;
  }
  sel.chosen = accuracies[best].first;
  sel.per_model_accuracy = std::move(accuracies);
  return sel;
}

ModelSelection select_best(std::span<const TextModel> models, std::span<const SparseVector> X_val,
                           std::span<const EmotionLabel> y_val) {
  if (X_val.empty()) throw InvalidArgument("select_best: empty validation set");
  std::vector<std::pair<std::string, double>> table;
  table.reserve(models.size());
  for (const auto& m : models) table.emplace_back(std::string(model_name(m)), accuracy(m, X_val, y_val));
  return choose_best(std::move(table));
}

}  // namespace liesensor::textclf
