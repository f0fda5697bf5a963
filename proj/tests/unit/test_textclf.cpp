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

#include <gtest/gtest.h>

#include <cmath>

#include "liesensor/error.hpp"
#include "liesensor/random.hpp"
#include "liesensor/textclf/bundle.hpp"
#include "support.hpp"

using namespace liesensor;
using namespace liesensor::textclf;
using features::SparseVector;

namespace {

constexpr auto H = EmotionLabel::Happiness;
constexpr auto S = EmotionLabel::Sadness;
constexpr auto U = EmotionLabel::Surprise;
constexpr auto A = EmotionLabel::Hate;

SparseVector dense(std::vector<double> v) { return SparseVector::from_dense(v); }

// Direct Bayes rule from raw counts, in long double, no logarithms:
// P(c|x) ∝ P(c) * prod_t P(t|c)^x_t.
EmotionScores brute_force_posterior(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                                    double alpha, const std::vector<int>& x) {
  const std::size_t V = X[0].dimension;
  std::array<long double, 4> score{};
  for (std::size_t c = 0; c < 4; ++c) {
    long double docs = 0, total = 0;
    std::vector<long double> count(V, 0);
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (index_of(y[i]) != c) continue;
      docs += 1;
      const auto d = X[i].to_dense();
      for (std::size_t t = 0; t < V; ++t) {
        count[t] += d[t];
        total += d[t];
      }
    }
    long double p = docs / static_cast<long double>(X.size());
    for (std::size_t t = 0; t < V; ++t) {
      const long double pt = (count[t] + alpha) / (total + alpha * static_cast<long double>(V));
      for (int k = 0; k < x[t]; ++k) p *= pt;
    }
    score[c] = p;
  }
  const long double z = score[0] + score[1] + score[2] + score[3];
  return {static_cast<double>(score[0] / z), static_cast<double>(score[1] / z),
          static_cast<double>(score[2] / z), static_cast<double>(score[3] / z)};
}

// Relative error, with differences below finite-difference roundoff
// (1e-7 absolute) counted as exact.
double rel_err(double a, double b) {
  const double d = std::abs(a - b);
  return d <= 1e-7 ? 0.0 : d / std::max(std::abs(a), std::abs(b));
}

struct Toy {
  std::vector<SparseVector> X;
  std::vector<EmotionLabel> y;
};

Toy separable_1d() {
  Toy t;
  for (int i = 0; i < 50; ++i) {
    t.X.push_back(dense({1.0}));
    t.y.push_back(H);
    t.X.push_back(dense({-1.0}));
    t.y.push_back(S);
  }
  return t;
}

Toy blobs(std::uint64_t seed, std::size_t per_class, double spread) {
  Rng rng(seed);
  Toy t;
  const double centers[4][2] = {{0, 0}, {6, 0}, {0, 6}, {6, 6}};
  for (std::size_t i = 0; i < per_class; ++i)
    for (std::size_t c = 0; c < 4; ++c) {
      t.X.push_back(dense({centers[c][0] + spread * rng.normal(), centers[c][1] + spread * rng.normal()}));
      t.y.push_back(label_at(c));
    }
  return t;
}

}  // namespace

// ---------------------------------------------------------------- naive bayes

TEST(NaiveBayes, SingleTermCorpus) {
  // every class holds one document with a single occurrence of the only term
  const std::vector<SparseVector> X(4, dense({1.0}));
  const std::vector<EmotionLabel> y = {H, S, U, A};
  const auto m = train_naive_bayes(X, y, 1.0);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(std::exp(m.log_likelihood[c][0]), 1.0);
}

TEST(NaiveBayes, HandComputedTable) {
  // class H: [3,1]; class S: [0,2]; U and A: [1,1]
  const std::vector<SparseVector> X = {dense({3, 1}), dense({0, 2}), dense({1, 1}), dense({1, 1})};
  const std::vector<EmotionLabel> y = {H, S, U, A};
  const auto m = train_naive_bayes(X, y, 1.0);
  EXPECT_NEAR(std::exp(m.log_likelihood[0][0]), 4.0 / 6.0, 1e-12);
  EXPECT_NEAR(std::exp(m.log_likelihood[0][1]), 2.0 / 6.0, 1e-12);
  EXPECT_NEAR(std::exp(m.log_likelihood[1][0]), 1.0 / 4.0, 1e-12);
  EXPECT_NEAR(std::exp(m.log_likelihood[1][1]), 3.0 / 4.0, 1e-12);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(std::exp(m.class_log_prior[c]), 0.25, 1e-12);
}

TEST(NaiveBayes, Preconditions) {
  const std::vector<SparseVector> X = {dense({1}), dense({1}), dense({1})};
  EXPECT_THROW(train_naive_bayes(X, std::vector<EmotionLabel>{H, S, A}, 1.0), InvalidArgument);
  EXPECT_THROW(train_naive_bayes(X, std::vector<EmotionLabel>{H, S}, 1.0), InvalidArgument);
  const std::vector<SparseVector> X4(4, dense({1}));
  EXPECT_THROW(train_naive_bayes(X4, std::vector<EmotionLabel>{H, S, U, A}, 0.0), InvalidArgument);
}

TEST(NaiveBayes, RowsAreDistributions) {
  const auto t = blobs(4, 10, 1.0);
  std::vector<SparseVector> X;
  for (const auto& v : t.X) {
    auto d = v.to_dense();
    X.push_back(dense({std::round(std::abs(d[0])), std::round(std::abs(d[1])), 1.0}));
  }
  const auto m = train_naive_bayes(X, t.y, 0.5);
  for (std::size_t c = 0; c < 4; ++c) {
    double s = 0;
    for (double l : m.log_likelihood[c]) s += std::exp(l);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

// Posterior equals direct Bayes-rule arithmetic for every count vector in
// {0,1,2}^V, over random corpora with V <= 5 and N <= 10.
TEST(NaiveBayes, BruteForceBayesOracle) {
  Rng rng(17);
  int corpora = 0;
  for (std::size_t V = 1; V <= 5; ++V) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t N = 4 + rng.index(7);
      std::vector<SparseVector> X;
      std::vector<EmotionLabel> y;
      for (std::size_t i = 0; i < N; ++i) {
        std::vector<double> v(V);
        for (auto& e : v) e = static_cast<double>(rng.index(4));
        X.push_back(SparseVector::from_dense(v));
        X.back().dimension = V;
        y.push_back(label_at(i < 4 ? i : rng.index(4)));
      }
      const double alpha = 0.25 + rng.uniform() * 2;
      const auto model = train_naive_bayes(X, y, alpha);
      ++corpora;
      std::vector<int> x(V, 0);
      for (;;) {
        std::vector<SparseVector::Entry> pairs;
        for (std::size_t t = 0; t < V; ++t)
          if (x[t]) pairs.push_back({static_cast<std::uint32_t>(t), static_cast<double>(x[t])});
        const auto sv = SparseVector::from_pairs(V, pairs);
        const auto got = predict_text(TextModel(model), sv);
        const auto want = brute_force_posterior(X, y, alpha, x);
        for (std::size_t c = 0; c < 4; ++c) ASSERT_NEAR(got.scores[c], want[c], 1e-9);
        std::size_t t = 0;
        while (t < V && ++x[t] == 3) x[t++] = 0;
        if (t == V) break;
      }
    }
  }
  EXPECT_EQ(corpora, 100);
}

TEST(NaiveBayes, PredictionExamples) {
  NaiveBayesModel uniform;
  uniform.class_log_prior.fill(std::log(0.25));
  for (auto& row : uniform.log_likelihood) row.assign(3, std::log(1.0 / 3));
  const auto p = predict_text(TextModel(uniform), dense({2, 0, 1}));
  for (double s : p.scores) EXPECT_NEAR(s, 0.25, 1e-12);
  EXPECT_EQ(p.label, H);

  // one feature; priors .4/.3/.2/.1, P(t|c) = .5/.2/.1/.9, x = 2
  NaiveBayesModel one;
  const double prior[4] = {0.4, 0.3, 0.2, 0.1}, lik[4] = {0.5, 0.2, 0.1, 0.9};
  for (int c = 0; c < 4; ++c) {
    one.class_log_prior[c] = std::log(prior[c]);
    one.log_likelihood[c] = {std::log(lik[c])};
  }
  const double joint[4] = {0.4 * 0.25, 0.3 * 0.04, 0.2 * 0.01, 0.1 * 0.81};
  const double z = joint[0] + joint[1] + joint[2] + joint[3];
  const auto q = predict_text(TextModel(one), dense({2}));
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(q.scores[c], joint[c] / z, 1e-9);
  EXPECT_THROW(predict_text(TextModel(one), dense({1, 1})), ShapeError);
}

// With equal class priors, scaling the counts keeps the argmax (the
// posterior's log-odds scale linearly).
TEST(NaiveBayes, ScalingInvarianceUnderUniformPriors) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SparseVector> X;
    std::vector<EmotionLabel> y;
    for (std::size_t i = 0; i < 12; ++i) {
      std::vector<double> v(4);
      for (auto& e : v) e = static_cast<double>(rng.index(5));
      X.push_back(SparseVector::from_dense(v));
      X.back().dimension = 4;
      y.push_back(label_at(i % 4));
    }
    const TextModel m = train_naive_bayes(X, y, 1.0);
    std::vector<double> v(4);
    for (auto& e : v) e = 1.0 + static_cast<double>(rng.index(4));
    const auto base = predict_text(m, dense(v));
    for (double k : {0.5, 2.0, 3.0, 10.0}) {
      std::vector<double> s = v;
      for (auto& e : s) e *= k;
      ASSERT_EQ(predict_text(m, dense(s)).label, base.label);
    }
  }
}

// ---------------------------------------------------------------- linear

TEST(Linear, SeparableToySet) {
  const auto t = separable_1d();
  LinearHyper h;
  h.epochs = 100;
  h.seed = 3;
  std::vector<double> losses;
  const TextModel lr = train_logistic(t.X, t.y, h, &losses);
  EXPECT_GE(accuracy(lr, t.X, t.y), 0.99);
  ASSERT_EQ(losses.size(), 100u);
  for (std::size_t e = 1; e < losses.size(); ++e) EXPECT_LE(losses[e], losses[e - 1] + 1e-12) << e;
  const TextModel svm = train_linear_svm(t.X, t.y, h);
  EXPECT_GE(accuracy(svm, t.X, t.y), 0.99);
}

TEST(Linear, HugePenaltyShrinksWeights) {
  const auto t = separable_1d();
  LinearHyper h;
  h.l2_lambda = 1e6;
  for (auto* train : {&train_logistic, &train_linear_svm}) {
    const auto m = (*train)(t.X, t.y, h, nullptr);
    double norm = 0;
    for (const auto& row : m.weights)
      for (double w : row) norm += w * w;
    EXPECT_LT(std::sqrt(norm), 1e-2);
  }
}

TEST(Linear, DeterministicUnderSeed) {
  const auto t = blobs(1, 20, 1.5);
  LinearHyper h;
  h.seed = 77;
  for (auto* train : {&train_logistic, &train_linear_svm}) {
    const auto a = (*train)(t.X, t.y, h, nullptr);
    const auto b = (*train)(t.X, t.y, h, nullptr);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.bias, b.bias);
  }
}

TEST(Linear, NoSignalCollapsesToMajority) {
  std::vector<SparseVector> X(20, dense({1.0, 2.0}));
  std::vector<EmotionLabel> y(20, S);
  y[0] = H;
  y[1] = U;
  y[2] = A;
  const TextModel svm = train_linear_svm(X, y, LinearHyper{});
  EXPECT_EQ(predict_text(svm, dense({1.0, 2.0})).label, S);
}

TEST(Linear, ZeroModelIsUniform) {
  const auto p = predict_text(TextModel(LinearModel::zeros(LinearKind::Svm, 3)), dense({1, 2, 3}));
  for (double s : p.scores) EXPECT_DOUBLE_EQ(s, 0.25);
  EXPECT_EQ(p.label, H);
}

// Analytic (sub)gradients vs central differences on 50 random instances per kind.
TEST(Linear, GradientsMatchFiniteDifferences) {
  Rng rng(123);
  for (auto kind : {LinearKind::Logistic, LinearKind::Svm}) {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t V = 1 + rng.index(8);
      auto m = LinearModel::zeros(kind, V);
      for (auto& row : m.weights)
        for (auto& w : row) w = rng.normal();
      for (auto& b : m.bias) b = rng.normal();
      std::vector<SparseVector> X;
      std::vector<EmotionLabel> y;
      for (int i = 0; i < 3; ++i) {
        std::vector<double> v(V);
        for (auto& e : v) e = rng.uniform(-2, 2);
        X.push_back(SparseVector::from_dense(v));
        X.back().dimension = V;
        y.push_back(label_at(rng.index(4)));
      }
      const double lambda = rng.uniform(0, 0.5);
      const auto obj = linear_objective(m, X, y, lambda);
      const double eps = 1e-6;
      for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t j = 0; j <= V; ++j) {
          double& p = j < V ? m.weights[c][j] : m.bias[c];
          const double keep = p;
          p = keep + eps;
          const double up = linear_objective(m, X, y, lambda).loss;
          p = keep - eps;
          const double down = linear_objective(m, X, y, lambda).loss;
          p = keep;
          const double numeric = (up - down) / (2 * eps);
          const double analytic = j < V ? obj.grad_weights[c][j] : obj.grad_bias[c];
          ASSERT_LE(rel_err(analytic, numeric), 1e-4) << analytic << " vs " << numeric
              << (kind == LinearKind::Svm ? "svm" : "logistic") << " trial " << trial << " c" << c << " j" << j;
        }
      }
    }
  }
}

// ---------------------------------------------------------------- forest

TEST(Forest, OneSplitProblem) {
  const std::vector<SparseVector> X = {dense({0}), dense({1})};
  auto X1 = X;
  X1[0].dimension = 1;
  const std::vector<EmotionLabel> y = {H, S};
  ForestHyper h;
  h.n_trees = 1;
  h.max_depth = 1;
  h.min_leaf = 1;
  h.bootstrap = false;
  const auto f = train_random_forest(X1, y, h);
  ASSERT_EQ(f.trees.size(), 1u);
  const auto& root = f.trees[0].nodes[0];
  ASSERT_FALSE(root.is_leaf());
  EXPECT_DOUBLE_EQ(root.threshold, 0.5);
  EXPECT_EQ(accuracy(TextModel(f), X1, y), 1.0);
}

TEST(Forest, BlobsAndDepth) {
  const auto t = blobs(9, 30, 1.0);
  ForestHyper h;
  h.n_trees = 25;
  h.seed = 2;
  const auto f = train_random_forest(t.X, t.y, h);
  EXPECT_GE(accuracy(TextModel(f), t.X, t.y), 0.95);
  for (const auto& tree : f.trees) EXPECT_LE(tree.depth(), h.max_depth);
}

TEST(Forest, DepthOneCannotRepresentXor) {
  std::vector<SparseVector> X;
  std::vector<EmotionLabel> y;
  for (int r = 0; r < 10; ++r)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        auto v = SparseVector::from_dense(std::vector<double>{double(a), double(b)});
        v.dimension = 2;
        X.push_back(v);
        y.push_back(a == b ? H : S);
      }
  ForestHyper h;
  h.n_trees = 1;
  h.max_depth = 1;
  h.bootstrap = false;
  h.feature_subsample = 2;
  EXPECT_NEAR(accuracy(TextModel(train_random_forest(X, y, h)), X, y), 0.5, 1e-12);
}

TEST(Forest, SingleTreeWithoutBootstrapIsTheTree) {
  const auto t = blobs(10, 15, 2.0);
  ForestHyper h;
  h.n_trees = 1;
  h.bootstrap = false;
  h.feature_subsample = 2;
  h.seed = 4;
  const auto f = train_random_forest(t.X, t.y, h);
  const std::vector<std::uint32_t> w(t.X.size(), 1);
  // same stream the forest hands its first tree
  const auto tree = train_decision_tree(t.X, t.y, w, h, Rng::derive(h.seed, 0).next_u64());
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto x = dense({rng.uniform(-3, 9), rng.uniform(-3, 9)});
    const auto fp = predict_text(TextModel(f), x);
    const auto tp = prediction_from_scores(tree.predict(x));
    ASSERT_EQ(fp.label, tp.label);
    ASSERT_EQ(fp.label, prediction_from_scores(f.trees[0].predict(x)).label);
  }
}

TEST(Forest, Deterministic) {
  const auto t = blobs(3, 10, 2.0);
  ForestHyper h;
  h.n_trees = 5;
  h.seed = 8;
  const auto a = train_random_forest(t.X, t.y, h);
  const auto b = train_random_forest(t.X, t.y, h);
  ASSERT_EQ(a.trees.size(), b.trees.size());
  for (std::size_t i = 0; i < a.trees.size(); ++i) {
    ASSERT_EQ(a.trees[i].nodes.size(), b.trees[i].nodes.size());
    for (std::size_t n = 0; n < a.trees[i].nodes.size(); ++n) {
      EXPECT_EQ(a.trees[i].nodes[n].feature, b.trees[i].nodes[n].feature);
      EXPECT_EQ(a.trees[i].nodes[n].threshold, b.trees[i].nodes[n].threshold);
    }
  }
}

// ---------------------------------------------------------------- selection

TEST(Selection, PublishedAccuracies) {
  // reported tweet accuracies, rounded
  const auto s = choose_best({{"naive_bayes", 0.69}, {"linear_svm", 0.71},
                              {"logistic_regression", 0.70}, {"random_forest", 0.70}});
  EXPECT_EQ(s.chosen, "linear_svm");
  EXPECT_DOUBLE_EQ(s.chosen_accuracy(), 0.71);
}

TEST(Selection, TiesAndSingletons) {
  EXPECT_EQ(choose_best({{"random_forest", 0.5}, {"logistic_regression", 0.5}, {"linear_svm", 0.5},
                         {"naive_bayes", 0.5}})
                .chosen,
            "naive_bayes");
  EXPECT_EQ(choose_best({{"random_forest", 0.1}}).chosen, "random_forest");
  EXPECT_THROW(choose_best({}), InvalidArgument);
  EXPECT_LT(selection_rank("naive_bayes"), selection_rank("linear_svm"));
  EXPECT_LT(selection_rank("linear_svm"), selection_rank("logistic_regression"));
  EXPECT_LT(selection_rank("logistic_regression"), selection_rank("random_forest"));
}

TEST(Selection, NeverWorseThanAnyCandidate) {
  Rng rng(4);
  const char* names[4] = {"naive_bayes", "linear_svm", "logistic_regression", "random_forest"};
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::pair<std::string, double>> acc;
    for (const char* n : names)
      if (rng.coin() || acc.empty()) acc.push_back({n, static_cast<double>(rng.index(5)) / 4});
    const auto s = choose_best(acc);
    for (const auto& [n, a] : acc) ASSERT_LE(a, s.chosen_accuracy());
  }
}

// ---------------------------------------------------------------- bundle

namespace {

TextTrainingResult small_pipeline(features::FeatureKind kind) {
  TextTrainingConfig cfg;
  cfg.feature_kind = kind;
  cfg.forest.n_trees = 5;
  cfg.linear.epochs = 5;
  return train_text_pipeline(test::synthetic_corpus(200, 12), cfg);
}

}  // namespace

TEST(Bundle, RoundTripEveryModelKind) {
  for (auto kind : {features::FeatureKind::Count, features::FeatureKind::Tfidf}) {
    auto result = small_pipeline(kind);
    ASSERT_EQ(result.candidates.size(), 4u);
    for (const auto& candidate : result.candidates) {
      TextBundle b = result.bundle;
      b.model = candidate;
      const std::string bytes = encode_bundle(b);
      const TextBundle back = decode_bundle(bytes);
      ASSERT_EQ(encode_bundle(back), bytes) << model_name(candidate);
      EXPECT_EQ(back.version, b.version);
      EXPECT_EQ(back.selection, b.selection);
      EXPECT_EQ(back.features.vocab, b.features.vocab);
      for (const char* text : {"so happy today", "sad and lonely", "wow omg"}) {
        const auto p = b.predict(text), q = back.predict(text);
        ASSERT_TRUE(p && q);
        EXPECT_EQ(p->scores, q->scores);
      }
    }
  }
}

TEST(Bundle, CorruptionIsDetected) {
  const std::string bytes = encode_bundle(small_pipeline(features::FeatureKind::Count).bundle);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{12}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(decode_bundle(std::string_view(bytes).substr(0, cut)), ChecksumError) << cut;
  }
  std::string flipped = bytes;
  flipped[bytes.size() / 3] ^= 0x40;
  EXPECT_THROW(decode_bundle(flipped), ChecksumError);
  EXPECT_THROW(load_bundle("/nonexistent/bundle.bin"), DataError);

  const auto dir = test::temp_dir("bundle");
  const auto b = small_pipeline(features::FeatureKind::Count).bundle;
  save_bundle(b, dir / "b.bin");
  EXPECT_EQ(encode_bundle(load_bundle(dir / "b.bin")), encode_bundle(b));
}

TEST(Bundle, NoSignalText) {
  const auto b = small_pipeline(features::FeatureKind::Count).bundle;
  EXPECT_FALSE(b.predict(""));
  EXPECT_FALSE(b.predict("zzzz qqqq"));
  EXPECT_TRUE(b.predict("HAPPPPY!!!"));
}

TEST(Pipeline, SelectionIsDeterministic) {
  const auto a = small_pipeline(features::FeatureKind::Count);
  const auto b = small_pipeline(features::FeatureKind::Count);
  EXPECT_EQ(a.bundle.selection, b.bundle.selection);
  EXPECT_EQ(encode_bundle(a.bundle), encode_bundle(b.bundle));
}
