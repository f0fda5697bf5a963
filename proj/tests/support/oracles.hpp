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

// Independent reference computations shared by the unit tests and the
// acceptance runner.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "liesensor/cnn/layers.hpp"
#include "liesensor/features/features.hpp"
#include "liesensor/random.hpp"
#include "liesensor/textclf/models.hpp"
#include "liesensor/vision/cascade.hpp"
#include "liesensor/vision/image.hpp"

namespace liesensor::test {

/// Relative error; differences below 1e-7 (finite-difference roundoff)
/// count as exact.
double rel_err(double a, double b);

/// Bayes rule from raw counts in long double without logarithms:
/// P(c|x) ∝ P(c) · Π_t P(t|c)^x_t.
EmotionScores brute_force_posterior(std::span<const features::SparseVector> X,
                                    std::span<const EmotionLabel> y, double alpha,
                                    const std::vector<int>& x);

struct OracleRun {
  double worst = 0.0;      // largest error seen
  double worst_abs = 0.0;  // largest absolute difference seen
  std::size_t cases = 0;   // instances examined
  std::string where;       // location of the worst error
};

/// 20 random corpora for each V in 1..5 (N <= 10), every x in {0,1,2}^V:
/// worst absolute posterior error against brute_force_posterior.
OracleRun naive_bayes_oracle(std::uint64_t seed);

/// `instances` random small problems: worst relative error between the
/// analytic objective gradient and central differences.
OracleRun linear_gradient_oracle(textclf::LinearKind kind, int instances, std::uint64_t seed);

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0);
void fill_random(cnn::Param& p, Rng& rng, double scale = 1.0);

/// Central-difference check of input and trainable-parameter gradients
/// under L = <forward(x), R> for a random R.
OracleRun layer_gradient_oracle(cnn::Layer& layer, Tensor x, Rng& rng);

/// Worst relative error over `instances` random instances of each layer
/// type: conv, sepconv, bn, maxpool, relu, gap, residual, softmax head.
OracleRun all_layer_gradients(int instances, std::uint64_t seed);

std::uint64_t brute_sum(const vision::GrayImage& img, int x, int y, int w, int h, bool square = false);

/// Every window size c.window * 1.1^k that fits, every position, features
/// summed pixel by pixel. Only valid for cascades without zero-sum features.
std::vector<vision::BoundingBox> exhaustive_windows(const vision::GrayImage& img,
                                                    const vision::Cascade& c, double min_stddev);

/// Accepts any variance-bearing 8x8 window whose centre 4x4 holds a lit pixel.
vision::Cascade centre_cascade();

/// Two stages of three random two-rect features on an 8x8 window.
vision::Cascade random_cascade(Rng& rng);

}  // namespace liesensor::test
