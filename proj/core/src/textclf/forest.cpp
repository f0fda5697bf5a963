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
#include <set>
#include <string>

#include "liesensor/error.hpp"
#include "liesensor/random.hpp"
#include "liesensor/textclf/models.hpp"

namespace liesensor::textclf {

namespace {

struct ColumnEntry {
  std::uint32_t sample;
  double value;
};

/// Column-major copy of the design matrix so a split search only touches
/// the non-zeros of the candidate feature.
using Columns = std::vector<std::vector<ColumnEntry>>;

Columns to_columns(std::span<const SparseVector> X, std::size_t dim) {
  Columns cols(dim);
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (const auto& [t, value] : X[i].entries) {
      cols[t].push_back({static_cast<std::uint32_t>(i), value});
    }
  }
  return cols;
}

double weighted_impurity(const EmotionScores& counts, double total) {
  if (total <= 0.0) return 0.0;
  double sq = 0.0;
  for (double c : counts) sq += c * c;
  return total - sq / total;  // total * gini
}

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Columns& cols, std::span<const EmotionLabel> y,
              std::span<const std::uint32_t> weight, const ForestHyper& hyper, std::uint64_t seed)
      : cols_(cols),
        y_(y),
        weight_(weight),
        hyper_(hyper),
        rng_(seed),
        mark_(y.size(), 0),
        value_(y.size(), 0.0) {
    const std::size_t dim = cols.size();
    const std::size_t requested =
        hyper.feature_subsample == 0
            ? static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))))
            : hyper.feature_subsample;
    tries_ = std::clamp<std::size_t>(requested, 1, dim);
  }

  DecisionTree build() {
    std::vector<std::uint32_t> root;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      if (weight_[i] > 0) root.push_back(static_cast<std::uint32_t>(i));
    }
    if (root.empty()) throw InvalidArgument("decision tree: all sample weights are zero");
    tree_.nodes.emplace_back();
    grow(0, std::move(root), 0);
    return std::move(tree_);
  }

 private:
  void grow(std::size_t node_index, std::vector<std::uint32_t> samples, std::uint32_t depth) {
    EmotionScores counts{};
    double total = 0.0;
    for (std::uint32_t s : samples) {
      counts[index_of(y_[s])] += weight_[s];
      total += weight_[s];
    }
    tree_.nodes[node_index].counts = counts;

    const auto classes_present =
        std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; });
    if (depth >= hyper_.max_depth || classes_present <= 1 ||
        total < 2.0 * static_cast<double>(hyper_.min_leaf)) {
      return;
    }

    const Split best = find_split(samples, counts, total);
    if (best.feature < 0) return;

    // Partition by the chosen feature's values.
    for (std::uint32_t s : samples) value_[s] = 0.0;
    ++stamp_;
    for (std::uint32_t s : samples) mark_[s] = stamp_;
    for (const auto& e : cols_[static_cast<std::size_t>(best.feature)]) {
      if (mark_[e.sample] == stamp_) value_[e.sample] = e.value;
    }
    std::vector<std::uint32_t> left, right;
    for (std::uint32_t s : samples) (value_[s] <= best.threshold ? left : right).push_back(s);
    samples.clear();
    samples.shrink_to_fit();

    const auto left_index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const auto right_index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    TreeNode& node = tree_.nodes[node_index];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left_index;
    node.right = right_index;
    grow(static_cast<std::size_t>(left_index), std::move(left), depth + 1);
    grow(static_cast<std::size_t>(right_index), std::move(right), depth + 1);
  }

  std::vector<std::uint32_t> candidate_features() {
    const std::size_t dim = cols_.size();
    std::vector<std::uint32_t> out;
    if (tries_ >= dim) {
      out.resize(dim);
      for (std::size_t f = 0; f < dim; ++f) out[f] = static_cast<std::uint32_t>(f);
      return out;
    }
    // Floyd's sampling of `tries_` distinct features.
    std::set<std::uint32_t> chosen;
    for (std::size_t j = dim - tries_; j < dim; ++j) {
      const auto t = static_cast<std::uint32_t>(rng_.index(j + 1));
      if (!chosen.insert(t).second) chosen.insert(static_cast<std::uint32_t>(j));
    }
    return {chosen.begin(), chosen.end()};
  }

  Split find_split(const std::vector<std::uint32_t>& samples, const EmotionScores& counts,
                   double total) {
    ++stamp_;
    for (std::uint32_t s : samples) mark_[s] = stamp_;

    const double parent = weighted_impurity(counts, total);
    const double min_leaf = static_cast<double>(hyper_.min_leaf);
    Split best;
    best.impurity = parent - 1e-12 * std::max(1.0, total);

    struct Group {
      double value;
      EmotionScores counts;
      double weight;
    };
    std::vector<Group> groups;
    std::vector<ColumnEntry> nonzero;

    for (std::uint32_t f : candidate_features()) {
      nonzero.clear();
      for (const auto& e : cols_[f]) {
        if (mark_[e.sample] == stamp_) nonzero.push_back(e);
      }
      if (nonzero.empty()) continue;
      std::sort(nonzero.begin(), nonzero.end(),
                [](const ColumnEntry& a, const ColumnEntry& b) { return a.value < b.value; });

      EmotionScores zero_counts = counts;
      double zero_weight = total;
      groups.clear();
      for (const auto& e : nonzero) {
        const double w = weight_[e.sample];
        const std::size_t c = index_of(y_[e.sample]);
        zero_counts[c] -= w;
        zero_weight -= w;
        if (groups.empty() || groups.back().value != e.value) groups.push_back({e.value, {}, 0.0});
        groups.back().counts[c] += w;
        groups.back().weight += w;
      }
      if (zero_weight > 0.5) {
        const auto pos = std::lower_bound(groups.begin(), groups.end(), 0.0,
                                          [](const Group& g, double v) { return g.value < v; });
        groups.insert(pos, Group{0.0, zero_counts, zero_weight});
      }
      if (groups.size() < 2) continue;

      EmotionScores left{};
      double left_weight = 0.0;
      for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        for (std::size_t c = 0; c < kEmotionCount; ++c) left[c] += groups[g].counts[c];
        left_weight += groups[g].weight;
        const double right_weight = total - left_weight;
        if (left_weight < min_leaf || right_weight < min_leaf) continue;
        EmotionScores right{};
        for (std::size_t c = 0; c < kEmotionCount; ++c) right[c] = counts[c] - left[c];
        const double impurity =
            weighted_impurity(left, left_weight) + weighted_impurity(right, right_weight);
        if (impurity < best.impurity) {
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = 0.5 * (groups[g].value + groups[g + 1].value);
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  const Columns& cols_;
  std::span<const EmotionLabel> y_;
  std::span<const std::uint32_t> weight_;
  const ForestHyper& hyper_;
  Rng rng_;
  std::size_t tries_ = 1;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<double> value_;
  DecisionTree tree_;
};

void check_forest_inputs(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                         const ForestHyper& hyper) {
  if (X.empty() || X.size() != y.size()) throw InvalidArgument("forest: need |X| == |y| > 0");
  if (hyper.max_depth < 1) throw InvalidArgument("forest: max_depth must be >= 1");
  if (hyper.min_leaf < 1) throw InvalidArgument("forest: min_leaf must be >= 1");
  const std::size_t dim = X[0].dimension;
  if (dim == 0) throw InvalidArgument("forest: zero-dimensional features");
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].dimension != dim) {
      throw ShapeError("forest: sample " + std::to_string(i) + " has dimension " +
                       std::to_string(X[i].dimension) + ", expected " + std::to_string(dim));
    }
  }
}

}  // namespace

EmotionScores DecisionTree::predict(const SparseVector& x) const {
  std::size_t n = 0;
  while (!nodes[n].is_leaf()) {
    const auto f = static_cast<std::uint32_t>(nodes[n].feature);
    // binary search the sparse entries for this feature
    const auto it = std::lower_bound(
        x.entries.begin(), x.entries.end(), f,
        [](const SparseVector::Entry& e, std::uint32_t key) { return e.first < key; });
    const double value = (it != x.entries.end() && it->first == f) ? it->second : 0.0;
    n = static_cast<std::size_t>(value <= nodes[n].threshold ? nodes[n].left : nodes[n].right);
  }
  EmotionScores dist = nodes[n].counts;
  double total = 0.0;
  for (double c : dist) total += c;
  for (double& c : dist) c /= total;
  return dist;
}

std::size_t DecisionTree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [n, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[n].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[n].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[n].right), d + 1);
    }
  }
  return deepest;
}

DecisionTree train_decision_tree(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                                 std::span<const std::uint32_t> sample_weight,
                                 const ForestHyper& hyper, std::uint64_t tree_seed) {
  check_forest_inputs(X, y, hyper);
  if (sample_weight.size() != X.size()) {
    throw InvalidArgument("decision tree: sample_weight size mismatch");
  }
  const Columns cols = to_columns(X, X[0].dimension);
  return TreeBuilder(cols, y, sample_weight, hyper, tree_seed).build();
}

RandomForestModel train_random_forest(std::span<const SparseVector> X,
                                      std::span<const EmotionLabel> y, const ForestHyper& hyper) {
  check_forest_inputs(X, y, hyper);
  if (hyper.n_trees < 1) throw InvalidArgument("forest: n_trees must be >= 1");
  RandomForestModel model;
  model.dimension = X[0].dimension;
  model.hyper = hyper;
  const Columns cols = to_columns(X, model.dimension);
  std::vector<std::uint32_t> weight(X.size());
  for (std::uint32_t t = 0; t < hyper.n_trees; ++t) {
    // Each tree draws from its own stream so results do not depend on the
    // order trees are built in.
    Rng rng = Rng::derive(hyper.seed, t);
    if (hyper.bootstrap) {
      std::fill(weight.begin(), weight.end(), 0u);
      for (std::size_t i = 0; i < X.size(); ++i) ++weight[rng.index(X.size())];
    } else {
      std::fill(weight.begin(), weight.end(), 1u);
    }
    model.trees.push_back(TreeBuilder(cols, y, weight, hyper, rng.next_u64()).build());
  }
  return model;
}

}  // namespace liesensor::textclf
