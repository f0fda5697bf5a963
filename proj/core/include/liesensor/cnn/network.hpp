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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "liesensor/cnn/layers.hpp"
#include "liesensor/corpus/emotion.hpp"

namespace liesensor::cnn {

enum class Mode { Train, Eval };

/// Ordered layer stack mapping (N, H, W, C) images to (N, classes) logits.
class Network {
 public:
  Network(Shape3 input, std::vector<LayerPtr> layers);
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  const Shape3& input_shape() const { return input_; }
  std::size_t class_count() const { return classes_; }
  const std::vector<LayerPtr>& layers() const { return layers_; }

  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

  /// Eval-mode forward; const and safe to share between threads.
  Tensor infer(const Tensor& x) const;
  /// Forward in the current mode. Train mode caches activations for backward.
  Tensor forward(const Tensor& x);
  /// Back-propagates dL/dlogits; gradients accumulate into every trainable
  /// parameter. Throws DivergenceError naming the layer on a non-finite gradient.
  void backward(const Tensor& grad_logits);

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  void zero_grad();
  /// sum over regularized parameters of l2 * ||w||^2.
  double l2_penalty() const;
  /// Adds d(l2_penalty)/dw to the gradients.
  void add_l2_grad();
  std::size_t parameter_count(bool trainable_only = true) const;

  /// Seeded fan-in uniform kernels, zero biases, identity BatchNorm; values
  /// are rounded to float32 so a saved network reloads bit-exactly.
  void init(std::uint64_t seed);

  /// Text architecture descriptor; parse_descriptor rebuilds the same
  /// topology with default-initialized parameters.
  std::string descriptor() const;

  /// Deep copy through the descriptor plus parameter values.
  Network clone() const;

 private:
  Shape3 input_;
  std::vector<LayerPtr> layers_;
  std::size_t classes_ = 0;
  Mode mode_ = Mode::Eval;
};

Network parse_descriptor(std::string_view text);

struct MiniXceptionSpec {
  std::size_t height = 48;
  std::size_t width = 48;
  std::size_t classes = kEmotionCount;
  /// Scales every filter count of the reference topology (8, 8 entry
  /// filters; 16, 32, 64, 128 per residual module).
  double width_multiplier = 0.5;
  std::size_t modules = 4;
  double l2 = 0.01;
};

/// Entry block: two valid 3x3 convs + BN + ReLU. Each residual module:
/// main = sepconv-BN-ReLU-sepconv-BN-maxpool(3, stride 2), shortcut = 1x1
/// stride-2 conv + BN. Head: 3x3 conv to `classes` channels + global
/// average pooling.
Network mini_xception(const MiniXceptionSpec& spec = {});

/// Mean negative log-likelihood over the batch of a max-subtracted softmax.
struct SoftmaxLoss {
  double loss = 0.0;
  Tensor probabilities;   // (N, classes)
  Tensor grad_logits;     // d(loss)/d(logits)
};
SoftmaxLoss softmax_cross_entropy(const Tensor& logits, const std::vector<EmotionLabel>& labels);

// Weight file:
//   "LSCNNWTS" u32 version str descriptor u32 block_count
//   block_count x { str name, u32 rank, rank x u32 dim, f32 values }
//   u32 crc32 of all preceding bytes
inline constexpr std::uint32_t kWeightFormatVersion = 1;

std::string encode_weights(const Network& net);
Network decode_weights(std::string_view bytes);
/// Loads parameter values into an existing network. Throws ShapeError naming
/// the layer when a block's shape differs and DataError for missing/extra blocks.
void decode_weights_into(Network& net, std::string_view bytes);

void save_weights(const Network& net, const std::filesystem::path& path);
Network load_weights(const std::filesystem::path& path);
void load_weights_into(Network& net, const std::filesystem::path& path);

}  // namespace liesensor::cnn
