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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "liesensor/error.hpp"
#include "liesensor/random.hpp"
#include "liesensor/textclf/models.hpp"

namespace liesensor::textclf {

namespace {

void check_inputs(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                  std::size_t dim) {
  if (X.empty() || X.size() != y.size()) throw InvalidArgument("linear: need |X| == |y| > 0");
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].dimension != dim) {
      throw ShapeError("linear: sample " + std::to_string(i) + " has dimension " +
                       std::to_string(X[i].dimension) + ", expected " + std::to_string(dim));
    }
  }
}

/// Per-sample loss and d loss / d margin.
double sample_loss(LinearKind kind, const EmotionScores& margins, EmotionLabel label,
                   EmotionScores& dmargin) {
  const std::size_t y = index_of(label);
  if (kind == LinearKind::Logistic) {
    const double top = *std::max_element(margins.begin(), margins.end());
    double sum = 0.0;
    for (double m : margins) sum += std::exp(m - top);
    const double log_z = top + std::log(sum);
    for (std::size_t c = 0; c < kEmotionCount; ++c) {
      dmargin[c] = std::exp(margins[c] - log_z) - (c == y ? 1.0 : 0.0);
    }
    return log_z - margins[y];
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < kEmotionCount; ++c) {
    const double target = c == y ? 1.0 : -1.0;
    const double hinge = 1.0 - target * margins[c];
    if (hinge > 0.0) {
      loss += hinge;
      dmargin[c] = -target;
    } else {
      dmargin[c] = 0.0;
    }
  }
  return loss;
}

double squared_norm(const LinearModel& model) {
  double sum = 0.0;
  for (const auto& row : model.weights) {
    for (double w : row) sum += w * w;
  }
  return sum;
}

double objective_value(const LinearModel& model, std::span<const SparseVector> X,
                       std::span<const EmotionLabel> y, double l2_lambda) {
  EmotionScores dm{};
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    loss += sample_loss(model.kind, model.margins(X[i]), y[i], dm);
  }
  return loss / static_cast<double>(X.size()) + 0.5 * l2_lambda * squared_norm(model);
}

LinearModel train_linear(LinearKind kind, std::span<const SparseVector> X,
                         std::span<const EmotionLabel> y, const LinearHyper& hyper,
                         std::vector<double>* epoch_loss) {
  if (X.empty()) throw InvalidArgument("linear: empty training set");
  const std::size_t dim = X[0].dimension;
  check_inputs(X, y, dim);
  if (!(hyper.learning_rate > 0.0)) throw InvalidArgument("linear: learning_rate must be > 0");
  if (hyper.epochs < 1) throw InvalidArgument("linear: epochs must be >= 1");
  if (hyper.batch_size < 1) throw InvalidArgument("linear: batch_size must be >= 1");
  if (hyper.l2_lambda < 0.0) throw InvalidArgument("linear: l2_lambda must be >= 0");

  LinearModel model = LinearModel::zeros(kind, dim);
  model.hyper = hyper;
  if (epoch_loss) epoch_loss->clear();

  std::vector<std::size_t> order(X.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(hyper.seed);
  EmotionScores dmargin{};

  for (std::uint32_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    const double lr = hyper.learning_rate / (1.0 + hyper.decay * static_cast<double>(epoch));
    const double shrink = 1.0 / (1.0 + lr * hyper.l2_lambda);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      const double step = lr / static_cast<double>(end - start);
      // Margins for the whole batch are taken before any update so the step
      // is the mean mini-batch gradient.
      std::vector<EmotionScores> coeffs(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        sample_loss(kind, model.margins(X[i]), y[i], dmargin);
        coeffs[b - start] = dmargin;
      }
      for (std::size_t b = start; b < end; ++b) {
        const auto& x = X[order[b]];
        const auto& g = coeffs[b - start];
        for (std::size_t c = 0; c < kEmotionCount; ++c) {
          if (g[c] == 0.0) continue;
          auto& row = model.weights[c];
          for (const auto& [t, value] : x.entries) row[t] -= step * g[c] * value;
          model.bias[c] -= step * g[c];
        }
      }
      if (hyper.l2_lambda > 0.0) {
        for (auto& row : model.weights) {
          for (double& w : row) w *= shrink;
        }
      }
    }
    const double loss = objective_value(model, X, y, hyper.l2_lambda);
    if (!std::isfinite(loss)) {
      throw DivergenceError("linear: non-finite loss at epoch " + std::to_string(epoch) +
                            " (learning_rate " + std::to_string(hyper.learning_rate) + ")");
    }
    if (epoch_loss) epoch_loss->push_back(loss);
  }
  return model;
}

}  // namespace

EmotionScores LinearModel::margins(const SparseVector& x) const {
  EmotionScores m = bias;
  for (std::size_t c = 0; c < kEmotionCount; ++c) m[c] += x.dot(weights[c]);
  return m;
}

LinearModel LinearModel::zeros(LinearKind kind, std::size_t dimension) {
  LinearModel model;
  model.kind = kind;
  for (auto& row : model.weights) row.assign(dimension, 0.0);
  return model;
}

LinearObjective linear_objective(const LinearModel& model, std::span<const SparseVector> X,
                                 std::span<const EmotionLabel> y, double l2_lambda) {
  check_inputs(X, y, model.dimension());
  LinearObjective out;
  for (std::size_t c = 0; c < kEmotionCount; ++c) out.grad_weights[c].assign(model.dimension(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(X.size());
  EmotionScores dm{};
  for (std::size_t i = 0; i < X.size(); ++i) {
    out.loss += sample_loss(model.kind, model.margins(X[i]), y[i], dm) * inv_n;
    for (std::size_t c = 0; c < kEmotionCount; ++c) {
      for (const auto& [t, value] : X[i].entries) out.grad_weights[c][t] += dm[c] * value * inv_n;
      out.grad_bias[c] += dm[c] * inv_n;
    }
  }
  out.loss += 0.5 * l2_lambda * squared_norm(model);
  for (std::size_t c = 0; c < kEmotionCount; ++c) {
    for (std::size_t t = 0; t < model.dimension(); ++t) {
      out.grad_weights[c][t] += l2_lambda * model.weights[c][t];
    }
  }
  return out;
}

LinearModel train_logistic(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                           const LinearHyper& hyper, std::vector<double>* epoch_loss) {
  return train_linear(LinearKind::Logistic, X, y, hyper, epoch_loss);
}

LinearModel train_linear_svm(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                             const LinearHyper& hyper, std::vector<double>* epoch_loss) {
  return train_linear(LinearKind::Svm, X, y, hyper, epoch_loss);
}

}  // namespace liesensor::textclf
