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
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "liesensor/corpus/emotion.hpp"
#include "liesensor/features/features.hpp"

namespace liesensor::textclf {

using features::SparseVector;

/// Label plus per-label scores that sum to 1; label is the argmax with
/// ties going to the lowest label index.
struct TextPrediction {
  EmotionLabel label = EmotionLabel::Happiness;
  EmotionScores scores{};
};

/// Stable softmax of four logits.
EmotionScores softmax(const EmotionScores& logits);
TextPrediction prediction_from_scores(const EmotionScores& scores);

// ---------------------------------------------------------------- Naive Bayes

struct NaiveBayesModel {
  double alpha = 1.0;
  EmotionScores class_log_prior{};
  /// log P(term | class), one row of length V per label.
  std::array<std::vector<double>, kEmotionCount> log_likelihood;

  std::size_t dimension() const { return log_likelihood[0].size(); }

  /// Unnormalized log posterior: log prior + sum_t x_t log P(t|c).
  EmotionScores joint_log_likelihood(const SparseVector& x) const;
};

/// Multinomial NB with additive smoothing:
///   log P(t|c) = ln((count_tc + alpha) / (count_c + alpha * V)).
/// Throws InvalidArgument for mismatched sizes, alpha <= 0, or any label
/// missing from y ("class with zero examples").
NaiveBayesModel train_naive_bayes(std::span<const SparseVector> X,
                                  std::span<const EmotionLabel> y, double alpha = 1.0);

// ---------------------------------------------------------------- linear

enum class LinearKind : std::uint8_t { Logistic = 0, Svm = 1 };

struct LinearHyper {
  double learning_rate = 0.1;
  double decay = 0.01;  // lr_epoch = learning_rate / (1 + decay * epoch)
  std::uint32_t epochs = 30;
  double l2_lambda = 1e-4;
  std::uint32_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct LinearModel {
  LinearKind kind = LinearKind::Logistic;
  LinearHyper hyper;
  std::array<std::vector<double>, kEmotionCount> weights;
  EmotionScores bias{};

  std::size_t dimension() const { return weights[0].size(); }
  EmotionScores margins(const SparseVector& x) const;
  static LinearModel zeros(LinearKind kind, std::size_t dimension);
};

/// Objective value and its gradient at the model's current parameters.
/// Logistic: mean softmax cross-entropy; SVM: mean one-vs-rest hinge
/// sum_c max(0, 1 - t_c * m_c) with t_c = +1 for the true class and -1
/// otherwise. Both add (l2_lambda / 2) * ||W||^2 (bias unpenalized).
struct LinearObjective {
  double loss = 0.0;
  std::array<std::vector<double>, kEmotionCount> grad_weights;
  EmotionScores grad_bias{};
};

LinearObjective linear_objective(const LinearModel& model, std::span<const SparseVector> X,
                                 std::span<const EmotionLabel> y, double l2_lambda);

/// Mini-batch SGD on the objective above. The data term takes an explicit
/// step and the L2 term a proximal step W /= (1 + lr * lambda), which stays
/// stable for any lambda. Deterministic under hyper.seed. If `epoch_loss`
/// is non-null it receives the full objective after every epoch. Throws
/// DivergenceError on a non-finite loss.
LinearModel train_logistic(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                           const LinearHyper& hyper, std::vector<double>* epoch_loss = nullptr);
LinearModel train_linear_svm(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                             const LinearHyper& hyper, std::vector<double>* epoch_loss = nullptr);

// ---------------------------------------------------------------- forest

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  EmotionScores counts{};  // weighted label counts of the training samples here

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// Normalized label distribution of the leaf x falls into.
  EmotionScores predict(const SparseVector& x) const;
  std::size_t depth() const;
};

struct ForestHyper {
  std::uint32_t n_trees = 50;
  std::uint32_t max_depth = 12;
  std::uint32_t min_leaf = 2;
  std::uint32_t feature_subsample = 0;  // features tried per split; 0 = round(sqrt(V))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct RandomForestModel {
  std::size_t dimension = 0;
  ForestHyper hyper;
  std::vector<DecisionTree> trees;
};

/// CART tree with Gini splits; thresholds are midpoints between adjacent
/// distinct sorted values. `sample_weight` holds per-sample multiplicities
/// (bootstrap counts); samples with weight 0 are ignored.
DecisionTree train_decision_tree(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                                 std::span<const std::uint32_t> sample_weight,
                                 const ForestHyper& hyper, std::uint64_t tree_seed);

RandomForestModel train_random_forest(std::span<const SparseVector> X,
                                      std::span<const EmotionLabel> y, const ForestHyper& hyper);

// ---------------------------------------------------------------- common

using TextModel = std::variant<NaiveBayesModel, LinearModel, RandomForestModel>;

/// "naive_bayes", "linear_svm", "logistic_regression" or "random_forest".
std::string_view model_name(const TextModel& model);
std::size_t model_dimension(const TextModel& model);

/// Throws ShapeError when x's dimension differs from the model's.
TextPrediction predict_text(const TextModel& model, const SparseVector& x);

double accuracy(const TextModel& model, std::span<const SparseVector> X,
                std::span<const EmotionLabel> y);

/// Position of a model name in the fixed tie-break order
/// naive_bayes < linear_svm < logistic_regression < random_forest.
std::size_t selection_rank(std::string_view name);

struct ModelSelection {
  /// (name, validation accuracy) in tie-break order.
  std::vector<std::pair<std::string, double>> per_model_accuracy;
  std::string chosen;

  double chosen_accuracy() const;
  friend bool operator==(const ModelSelection&, const ModelSelection&) = default;
};

/// Picks the highest accuracy; ties go to the earliest name in the fixed
/// order. Throws InvalidArgument on an empty table.
ModelSelection choose_best(std::vector<std::pair<std::string, double>> accuracies);

/// Scores every model on the validation set and applies choose_best.
ModelSelection select_best(std::span<const TextModel> models, std::span<const SparseVector> X_val,
                           std::span<const EmotionLabel> y_val);

}  // namespace liesensor::textclf
