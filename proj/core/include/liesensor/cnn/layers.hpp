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
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "liesensor/random.hpp"
#include "liesensor/tensor.hpp"

namespace liesensor::cnn {

enum class Padding { Same, Valid };

std::string_view to_string(Padding p);

/// Spatial output length and leading pad for a k-wide window with the given
/// stride. Same: ceil(in/stride) with the excess split floor-first;
/// valid: floor((in-k)/stride)+1.
struct Span1D {
  std::size_t out = 0;
  std::size_t pad_before = 0;
};
Span1D conv_span(std::size_t in, std::size_t k, std::size_t stride, Padding p);

/// Height, width, channels of one sample.
using Shape3 = std::array<std::size_t, 3>;

/// Named parameter block. Trainable blocks carry a gradient; BatchNorm
/// running statistics are stored as non-trainable blocks so they travel
/// with the weight file.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
  /// Kernel regularizer coefficient; the loss gains l2 * sum(value^2).
  double l2 = 0.0;
};

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  const std::string& name() const { return name_; }
  virtual std::string_view kind() const = 0;

  /// Throws ShapeError when `in` is not accepted.
  virtual Shape3 output_shape(const Shape3& in) const = 0;

  /// Eval mode: stateless, safe to call concurrently.
  virtual Tensor infer(const Tensor& x) const = 0;
  /// Train mode: caches what backward needs; BatchNorm updates its running
  /// statistics here.
  virtual Tensor forward(const Tensor& x) = 0;
  /// Accumulates parameter gradients and returns dL/dx.
  virtual Tensor backward(const Tensor& grad_out) = 0;

  virtual std::vector<Param*> params() { return {}; }
  std::vector<const Param*> params() const;

  virtual void init(Rng&) {}

  /// One descriptor line per primitive layer (composites emit blocks).
  virtual void describe(std::ostream& os, int indent) const = 0;

 private:
  std::string name_;
};

using LayerPtr = std::unique_ptr<Layer>;

class Conv2D final : public Layer {
 public:
  Conv2D(std::string name, std::size_t k, std::size_t cin, std::size_t cout, std::size_t stride,
         Padding pad, bool bias, double l2);

  std::string_view kind() const override { return "conv"; }
  Shape3 output_shape(const Shape3& in) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override;
  void init(Rng& rng) override;
  void describe(std::ostream& os, int indent) const override;

  Param& kernel() { return kernel_; }  // (k, k, cin, cout)
  Param& bias() { return bias_; }      // (cout); empty when disabled
  bool has_bias() const { return has_bias_; }
  std::size_t k() const { return k_; }
  std::size_t cin() const { return cin_; }
  std::size_t cout() const { return cout_; }
  std::size_t stride() const { return stride_; }
  Padding padding() const { return pad_; }

 private:
  std::size_t k_, cin_, cout_, stride_;
  Padding pad_;
  bool has_bias_;
  Param kernel_, bias_;
  Tensor input_;
};

/// Depthwise k x k per channel (stride 1, same padding) followed by a 1x1
/// pointwise channel mix. No bias.
class SepConv2D final : public Layer {
 public:
  SepConv2D(std::string name, std::size_t k, std::size_t cin, std::size_t cout, double l2);

  std::string_view kind() const override { return "sepconv"; }
  Shape3 output_shape(const Shape3& in) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override;
  void init(Rng& rng) override;
  void describe(std::ostream& os, int indent) const override;

  Param& depthwise() { return depthwise_; }  // (k, k, cin)
  Param& pointwise() { return pointwise_; }  // (cin, cout)
  std::size_t parameter_count() const { return k_ * k_ * cin_ + cin_ * cout_; }
  std::size_t k() const { return k_; }
  std::size_t cin() const { return cin_; }
  std::size_t cout() const { return cout_; }

  static Tensor depthwise_pass(const Tensor& x, const Tensor& dw, std::size_t k);
  static Tensor pointwise_pass(const Tensor& x, const Tensor& pw);

 private:
  std::size_t k_, cin_, cout_;
  Param depthwise_, pointwise_;
  Tensor input_, mid_;
};

class BatchNorm final : public Layer {
 public:
  static constexpr double kDefaultMomentum = 0.99;
  static constexpr double kDefaultEpsilon = 1e-5;

  BatchNorm(std::string name, std::size_t channels, double momentum = kDefaultMomentum,
            double epsilon = kDefaultEpsilon);

  std::string_view kind() const override { return "bn"; }
  Shape3 output_shape(const Shape3& in) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override;
  void init(Rng& rng) override;
  void describe(std::ostream& os, int indent) const override;

  Param& gamma() { return gamma_; }
  Param& beta() { return beta_; }
  Param& running_mean() { return running_mean_; }
  Param& running_var() { return running_var_; }
  double momentum() const { return momentum_; }
  double epsilon() const { return epsilon_; }

 private:
  std::size_t channels_;
  double momentum_, epsilon_;
  Param gamma_, beta_, running_mean_, running_var_;
  Tensor xhat_;
  std::vector<double> inv_std_;
};

class ReLU final : public Layer {
 public:
  explicit ReLU(std::string name) : Layer(std::move(name)) {}
  std::string_view kind() const override { return "relu"; }
  Shape3 output_shape(const Shape3& in) const override { return in; }
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void describe(std::ostream& os, int indent) const override;

 private:
  Tensor input_;
};

/// Max pooling with a square window and same padding (padded cells never win).
class MaxPool final : public Layer {
 public:
  MaxPool(std::string name, std::size_t k = 3, std::size_t stride = 2);
  std::string_view kind() const override { return "maxpool"; }
  Shape3 output_shape(const Shape3& in) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void describe(std::ostream& os, int indent) const override;

 private:
  Tensor pool(const Tensor& x, std::vector<std::size_t>* argmax) const;
  std::size_t k_, stride_;
  std::vector<std::size_t> input_shape_;
  std::vector<std::size_t> argmax_;
};

/// (N, H, W, C) -> (N, C) spatial mean.
class GlobalAvgPool final : public Layer {
 public:
  explicit GlobalAvgPool(std::string name) : Layer(std::move(name)) {}
  std::string_view kind() const override { return "gap"; }
  Shape3 output_shape(const Shape3& in) const override { return {1, 1, in[2]}; }
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void describe(std::ostream& os, int indent) const override;

 private:
  std::vector<std::size_t> input_shape_;
};

/// out = main(x) + shortcut(x); an empty shortcut is the identity.
class Residual final : public Layer {
 public:
  Residual(std::string name, std::vector<LayerPtr> main, std::vector<LayerPtr> shortcut);

  std::string_view kind() const override { return "residual"; }
  Shape3 output_shape(const Shape3& in) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override;
  void init(Rng& rng) override;
  void describe(std::ostream& os, int indent) const override;

  std::vector<LayerPtr>& main() { return main_; }
  std::vector<LayerPtr>& shortcut() { return shortcut_; }

 private:
  std::vector<LayerPtr> main_, shortcut_;
};

/// Every value rounded to the nearest float32, the precision of the weight file.
void round_to_float(Tensor& t);

/// Applies a stack of layers, checking shapes against `in` and naming the
/// offending layer index on mismatch.
Shape3 chain_shape(const std::vector<LayerPtr>& layers, Shape3 in, std::string_view where);

}  // namespace liesensor::cnn
