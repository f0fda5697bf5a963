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

#include "liesensor/cnn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "liesensor/error.hpp"

namespace liesensor::cnn {

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ostream& pad_line(std::ostream& os, int indent) {
  for (int i = 0; i < indent; ++i) os << "  ";
  return os;
}

void require_rank4(const Tensor& x, const Layer& layer) {
  if (x.rank() != 4) {
    throw ShapeError(std::string(layer.kind()) + " '" + layer.name() + "': expected NHWC input, got " +
                     x.shape_string());
  }
}

void require_channels(const Tensor& x, std::size_t c, const Layer& layer) {
  if (x.rank() < 2 || x.shape.back() != c) {
    throw ShapeError(std::string(layer.kind()) + " '" + layer.name() + "': expected " +
                     std::to_string(c) + " channels, got shape " + x.shape_string());
  }
}

Param make_param(std::string name, std::vector<std::size_t> shape, double fill, bool trainable,
                 double l2) {
  Param p;
  p.name = std::move(name);
  p.value = Tensor(shape, fill);
  p.grad = trainable ? Tensor(shape, 0.0) : Tensor();
  p.trainable = trainable;
  p.l2 = l2;
  return p;
}

void he_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& v : t.data) v = rng.uniform(-limit, limit);
  round_to_float(t);
}

/// Shared direct convolution; NHWC input, (k,k,cin,cout) kernel.
Tensor conv_pass(const Tensor& x, const Tensor& w, const Tensor* bias, std::size_t k,
                 std::size_t cout, std::size_t stride, Padding pad) {
  const std::size_t n = x.dim(0), h = x.dim(1), wd = x.dim(2), cin = x.dim(3);
  const Span1D sy = conv_span(h, k, stride, pad), sx = conv_span(wd, k, stride, pad);
  Tensor out({n, sy.out, sx.out, cout});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t oy = 0; oy < sy.out; ++oy) {
      for (std::size_t ox = 0; ox < sx.out; ++ox) {
        double* o = &out.at(b, oy, ox, 0);
        if (bias) std::copy(bias->data.begin(), bias->data.end(), o);
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                    static_cast<std::ptrdiff_t>(sy.pad_before);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                      static_cast<std::ptrdiff_t>(sx.pad_before);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
            const double* in = &x.at(b, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), 0);
            const double* wk = &w.data[(ky * k + kx) * cin * cout];
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const double v = in[ci];
              const double* wr = wk + ci * cout;
              for (std::size_t co = 0; co < cout; ++co) o[co] += v * wr[co];
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Padding p) { return p == Padding::Same ? "same" : "valid"; }

Span1D conv_span(std::size_t in, std::size_t k, std::size_t stride, Padding p) {
  if (stride == 0) throw InvalidArgument("stride must be positive");
  if (p == Padding::Valid) {
    if (in < k) return {0, 0};
    return {(in - k) / stride + 1, 0};
  }
  const std::size_t out = (in + stride - 1) / stride;
  const std::size_t need = (out - 1) * stride + k;
  const std::size_t total = need > in ? need - in : 0;
  return {out, total / 2};
}

std::vector<const Param*> Layer::params() const {
  auto mutable_params = const_cast<Layer*>(this)->params();
  return {mutable_params.begin(), mutable_params.end()};
}

void round_to_float(Tensor& t) {
  for (double& v : t.data) v = static_cast<double>(static_cast<float>(v));
}

Shape3 chain_shape(const std::vector<LayerPtr>& layers, Shape3 in, std::string_view where) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    try {
      in = layers[i]->output_shape(in);
    } catch (const ShapeError& e) {
      throw ShapeError(std::string(where) + " layer " + std::to_string(i) + ": " + e.what());
    }
  }
  return in;
}

// ---------------------------------------------------------------- Conv2D

Conv2D::Conv2D(std::string name, std::size_t k, std::size_t cin, std::size_t cout,
               std::size_t stride, Padding pad, bool bias, double l2)
    : Layer(std::move(name)), k_(k), cin_(cin), cout_(cout), stride_(stride), pad_(pad),
      has_bias_(bias) {
  if (k == 0 || cin == 0 || cout == 0 || stride == 0 || l2 < 0) {
    throw InvalidArgument("conv '" + this->name() + "': invalid hyper-parameters");
  }
  kernel_ = make_param(this->name() + ".kernel", {k, k, cin, cout}, 0.0, true, l2);
  if (has_bias_) bias_ = make_param(this->name() + ".bias", {cout}, 0.0, true, 0.0);
}

Shape3 Conv2D::output_shape(const Shape3& in) const {
  if (in[2] != cin_) {
    throw ShapeError("conv '" + name() + "': expected " + std::to_string(cin_) +
                     " input channels, got " + std::to_string(in[2]));
  }
  const auto sy = conv_span(in[0], k_, stride_, pad_), sx = conv_span(in[1], k_, stride_, pad_);
  if (sy.out == 0 || sx.out == 0) {
    throw ShapeError("conv '" + name() + "': input " + std::to_string(in[0]) + "x" +
                     std::to_string(in[1]) + " smaller than kernel");
  }
  return {sy.out, sx.out, cout_};
}

Tensor Conv2D::infer(const Tensor& x) const {
  require_rank4(x, *this);
  output_shape({x.dim(1), x.dim(2), x.dim(3)});
  return conv_pass(x, kernel_.value, has_bias_ ? &bias_.value : nullptr, k_, cout_, stride_, pad_);
}

Tensor Conv2D::forward(const Tensor& x) {
  Tensor y = infer(x);
  input_ = x;
  return y;
}

Tensor Conv2D::backward(const Tensor& g) {
  const Tensor& x = input_;
  const std::size_t n = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const Span1D sy = conv_span(h, k_, stride_, pad_), sx = conv_span(wd, k_, stride_, pad_);
  Tensor dx(x.shape, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t oy = 0; oy < sy.out; ++oy) {
      for (std::size_t ox = 0; ox < sx.out; ++ox) {
        const double* go = &g.at(b, oy, ox, 0);
        if (has_bias_) {
          for (std::size_t co = 0; co < cout_; ++co) bias_.grad[co] += go[co];
        }
        for (std::size_t ky = 0; ky < k_; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) -
                                    static_cast<std::ptrdiff_t>(sy.pad_before);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) -
                                      static_cast<std::ptrdiff_t>(sx.pad_before);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
            const auto uy = static_cast<std::size_t>(iy), ux = static_cast<std::size_t>(ix);
            const double* in = &x.at(b, uy, ux, 0);
            double* din = &dx.at(b, uy, ux, 0);
            const std::size_t base = (ky * k_ + kx) * cin_ * cout_;
            const double* wk = &kernel_.value.data[base];
            double* dwk = &kernel_.grad.data[base];
            for (std::size_t ci = 0; ci < cin_; ++ci) {
              double acc = 0.0;
              for (std::size_t co = 0; co < cout_; ++co) {
                dwk[ci * cout_ + co] += in[ci] * go[co];
                acc += wk[ci * cout_ + co] * go[co];
              }
              din[ci] += acc;
            }
          }
        }
      }
    }
  }
  return dx;
}

std::vector<Param*> Conv2D::params() {
  if (has_bias_) return {&kernel_, &bias_};
  return {&kernel_};
}

void Conv2D::init(Rng& rng) {
  he_uniform(kernel_.value, k_ * k_ * cin_, rng);
  if (has_bias_) std::fill(bias_.value.data.begin(), bias_.value.data.end(), 0.0);
}

void Conv2D::describe(std::ostream& os, int indent) const {
  pad_line(os, indent) << "conv " << name() << ' ' << k_ << ' ' << cin_ << ' ' << cout_ << ' '
                       << stride_ << ' ' << to_string(pad_) << ' ' << (has_bias_ ? 1 : 0) << ' '
                       << real(kernel_.l2) << '\n';
}

// ---------------------------------------------------------------- SepConv2D

SepConv2D::SepConv2D(std::string name, std::size_t k, std::size_t cin, std::size_t cout, double l2)
    : Layer(std::move(name)), k_(k), cin_(cin), cout_(cout) {
  if (k == 0 || cin == 0 || cout == 0 || l2 < 0) {
    throw InvalidArgument("sepconv '" + this->name() + "': invalid hyper-parameters");
  }
  if (k > 1 && cout > 1 && parameter_count() >= k * k * cin * cout) {
    throw InvalidArgument("sepconv '" + this->name() + "': not cheaper than a full convolution");
  }
  depthwise_ = make_param(this->name() + ".depthwise", {k, k, cin}, 0.0, true, l2);
  pointwise_ = make_param(this->name() + ".pointwise", {cin, cout}, 0.0, true, l2);
}

Shape3 SepConv2D::output_shape(const Shape3& in) const {
  if (in[2] != cin_) {
    throw ShapeError("sepconv '" + name() + "': expected " + std::to_string(cin_) +
                     " input channels, got " + std::to_string(in[2]));
  }
  return {in[0], in[1], cout_};
}

Tensor SepConv2D::depthwise_pass(const Tensor& x, const Tensor& dw, std::size_t k) {
  const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const std::size_t p = conv_span(h, k, 1, Padding::Same).pad_before;
  const std::size_t px = conv_span(w, k, 1, Padding::Same).pad_before;
  Tensor out(x.shape, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t xx = 0; xx < w; ++xx) {
        double* o = &out.at(b, y, xx, 0);
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(p);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(xx + kx) - static_cast<std::ptrdiff_t>(px);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            const double* in = &x.at(b, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), 0);
            const double* wk = &dw.data[(ky * k + kx) * c];
            for (std::size_t ch = 0; ch < c; ++ch) o[ch] += in[ch] * wk[ch];
          }
        }
      }
    }
  }
  return out;
}

Tensor SepConv2D::pointwise_pass(const Tensor& x, const Tensor& pw) {
  const std::size_t cin = pw.dim(0), cout = pw.dim(1);
  const std::size_t pixels = x.size() / cin;
  std::vector<std::size_t> shape = x.shape;
  shape.back() = cout;
  Tensor out(shape, 0.0);
  for (std::size_t i = 0; i < pixels; ++i) {
    const double* in = &x.data[i * cin];
    double* o = &out.data[i * cout];
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double v = in[ci];
      const double* wr = &pw.data[ci * cout];
      for (std::size_t co = 0; co < cout; ++co) o[co] += v * wr[co];
    }
  }
  return out;
}

Tensor SepConv2D::infer(const Tensor& x) const {
  require_rank4(x, *this);
  require_channels(x, cin_, *this);
  return pointwise_pass(depthwise_pass(x, depthwise_.value, k_), pointwise_.value);
}

Tensor SepConv2D::forward(const Tensor& x) {
  require_rank4(x, *this);
  require_channels(x, cin_, *this);
  input_ = x;
  mid_ = depthwise_pass(x, depthwise_.value, k_);
  return pointwise_pass(mid_, pointwise_.value);
}

Tensor SepConv2D::backward(const Tensor& g) {
  // Pointwise: dmid = g * pw^T, dpw += mid^T g.
  const std::size_t pixels = mid_.size() / cin_;
  Tensor dmid(mid_.shape, 0.0);
  for (std::size_t i = 0; i < pixels; ++i) {
    const double* m = &mid_.data[i * cin_];
    const double* go = &g.data[i * cout_];
    double* dm = &dmid.data[i * cin_];
    for (std::size_t ci = 0; ci < cin_; ++ci) {
      double acc = 0.0;
      for (std::size_t co = 0; co < cout_; ++co) {
        pointwise_.grad.data[ci * cout_ + co] += m[ci] * go[co];
        acc += pointwise_.value.data[ci * cout_ + co] * go[co];
      }
      dm[ci] = acc;
    }
  }
  // Depthwise.
  const Tensor& x = input_;
  const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = cin_;
  const std::size_t p = conv_span(h, k_, 1, Padding::Same).pad_before;
  const std::size_t px = conv_span(w, k_, 1, Padding::Same).pad_before;
  Tensor dx(x.shape, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t xx = 0; xx < w; ++xx) {
        const double* go = &dmid.at(b, y, xx, 0);
        for (std::size_t ky = 0; ky < k_; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(p);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(xx + kx) - static_cast<std::ptrdiff_t>(px);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            const auto uy = static_cast<std::size_t>(iy), ux = static_cast<std::size_t>(ix);
            const double* in = &x.at(b, uy, ux, 0);
            double* din = &dx.at(b, uy, ux, 0);
            const std::size_t base = (ky * k_ + kx) * c;
            for (std::size_t ch = 0; ch < c; ++ch) {
              depthwise_.grad.data[base + ch] += in[ch] * go[ch];
              din[ch] += depthwise_.value.data[base + ch] * go[ch];
            }
          }
        }
      }
    }
  }
  return dx;
}

std::vector<Param*> SepConv2D::params() { return {&depthwise_, &pointwise_}; }

void SepConv2D::init(Rng& rng) {
  he_uniform(depthwise_.value, k_ * k_, rng);
  he_uniform(pointwise_.value, cin_, rng);
}

void SepConv2D::describe(std::ostream& os, int indent) const {
  pad_line(os, indent) << "sepconv " << name() << ' ' << k_ << ' ' << cin_ << ' ' << cout_ << ' '
                       << real(depthwise_.l2) << '\n';
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::string name, std::size_t channels, double momentum, double epsilon)
    : Layer(std::move(name)), channels_(channels), momentum_(momentum), epsilon_(epsilon) {
  if (channels == 0 || momentum < 0 || momentum > 1 || !(epsilon > 0)) {
    throw InvalidArgument("bn '" + this->name() + "': invalid hyper-parameters");
  }
  gamma_ = make_param(this->name() + ".gamma", {channels}, 1.0, true, 0.0);
  beta_ = make_param(this->name() + ".beta", {channels}, 0.0, true, 0.0);
  running_mean_ = make_param(this->name() + ".running_mean", {channels}, 0.0, false, 0.0);
  running_var_ = make_param(this->name() + ".running_var", {channels}, 1.0, false, 0.0);
}

Shape3 BatchNorm::output_shape(const Shape3& in) const {
  if (in[2] != channels_) {
    throw ShapeError("bn '" + name() + "': expected " + std::to_string(channels_) +
                     " channels, got " + std::to_string(in[2]));
  }
  return in;
}

Tensor BatchNorm::infer(const Tensor& x) const {
  require_channels(x, channels_, *this);
  Tensor y(x.shape);
  const std::size_t m = x.size() / channels_;
  for (std::size_t c = 0; c < channels_; ++c) {
    const double scale = gamma_.value[c] / std::sqrt(running_var_.value[c] + epsilon_);
    const double shift = beta_.value[c] - running_mean_.value[c] * scale;
    for (std::size_t i = 0; i < m; ++i) y.data[i * channels_ + c] = x.data[i * channels_ + c] * scale + shift;
  }
  return y;
}

Tensor BatchNorm::forward(const Tensor& x) {
  require_channels(x, channels_, *this);
  const std::size_t m = x.size() / channels_;
  if (m == 0) throw InvalidArgument("bn '" + name() + "': empty batch in train mode");
  std::vector<double> mean(channels_, 0.0), var(channels_, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < channels_; ++c) mean[c] += x.data[i * channels_ + c];
  }
  for (double& v : mean) v /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < channels_; ++c) {
      const double d = x.data[i * channels_ + c] - mean[c];
      var[c] += d * d;
    }
  }
  for (double& v : var) v /= static_cast<double>(m);

  inv_std_.assign(channels_, 0.0);
  xhat_ = Tensor(x.shape);
  Tensor y(x.shape);
  for (std::size_t c = 0; c < channels_; ++c) {
    inv_std_[c] = 1.0 / std::sqrt(var[c] + epsilon_);
    running_mean_.value[c] = momentum_ * running_mean_.value[c] + (1 - momentum_) * mean[c];
    running_var_.value[c] = momentum_ * running_var_.value[c] + (1 - momentum_) * var[c];
  }
  round_to_float(running_mean_.value);
  round_to_float(running_var_.value);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < channels_; ++c) {
      const std::size_t j = i * channels_ + c;
      xhat_.data[j] = (x.data[j] - mean[c]) * inv_std_[c];
      y.data[j] = gamma_.value[c] * xhat_.data[j] + beta_.value[c];
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& g) {
  const std::size_t m = g.size() / channels_;
  std::vector<double> sum_g(channels_, 0.0), sum_gx(channels_, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < channels_; ++c) {
      const std::size_t j = i * channels_ + c;
      sum_g[c] += g.data[j];
      sum_gx[c] += g.data[j] * xhat_.data[j];
    }
  }
  for (std::size_t c = 0; c < channels_; ++c) {
    gamma_.grad[c] += sum_gx[c];
    beta_.grad[c] += sum_g[c];
  }
  Tensor dx(g.shape);
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < channels_; ++c) {
      const std::size_t j = i * channels_ + c;
      dx.data[j] = gamma_.value[c] * inv_std_[c] / md *
                   (md * g.data[j] - sum_g[c] - xhat_.data[j] * sum_gx[c]);
    }
  }
  return dx;
}

std::vector<Param*> BatchNorm::params() { return {&gamma_, &beta_, &running_mean_, &running_var_}; }

void BatchNorm::init(Rng&) {
  std::fill(gamma_.value.data.begin(), gamma_.value.data.end(), 1.0);
  std::fill(beta_.value.data.begin(), beta_.value.data.end(), 0.0);
  std::fill(running_mean_.value.data.begin(), running_mean_.value.data.end(), 0.0);
  std::fill(running_var_.value.data.begin(), running_var_.value.data.end(), 1.0);
}

void BatchNorm::describe(std::ostream& os, int indent) const {
  pad_line(os, indent) << "bn " << name() << ' ' << channels_ << ' ' << real(momentum_) << ' '
                       << real(epsilon_) << '\n';
}

// ---------------------------------------------------------------- ReLU

Tensor ReLU::infer(const Tensor& x) const {
  Tensor y = x;
  for (double& v : y.data) v = v > 0 ? v : 0.0;
  return y;
}

Tensor ReLU::forward(const Tensor& x) {
  input_ = x;
  return infer(x);
}

Tensor ReLU::backward(const Tensor& g) {
  Tensor dx = g;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(input_.data[i] > 0)) dx.data[i] = 0.0;
  }
  return dx;
}

void ReLU::describe(std::ostream& os, int indent) const {
  pad_line(os, indent) << "relu " << name() << '\n';
}

// ---------------------------------------------------------------- MaxPool

MaxPool::MaxPool(std::string name, std::size_t k, std::size_t stride)
    : Layer(std::move(name)), k_(k), stride_(stride) {
  if (k == 0 || stride == 0) throw InvalidArgument("maxpool '" + this->name() + "': invalid size");
}

Shape3 MaxPool::output_shape(const Shape3& in) const {
  return {conv_span(in[0], k_, stride_, Padding::Same).out,
          conv_span(in[1], k_, stride_, Padding::Same).out, in[2]};
}

Tensor MaxPool::pool(const Tensor& x, std::vector<std::size_t>* argmax) const {
  require_rank4(x, *this);
  const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const Span1D sy = conv_span(h, k_, stride_, Padding::Same);
  const Span1D sx = conv_span(w, k_, stride_, Padding::Same);
  Tensor out({n, sy.out, sx.out, c});
  if (argmax) argmax->assign(out.size(), 0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t oy = 0; oy < sy.out; ++oy) {
      for (std::size_t ox = 0; ox < sx.out; ++ox) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_i = 0;
          for (std::size_t ky = 0; ky < k_; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) -
                                      static_cast<std::ptrdiff_t>(sy.pad_before);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < k_; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) -
                                        static_cast<std::ptrdiff_t>(sx.pad_before);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              const std::size_t j =
                  ((b * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)) * c + ch;
              if (x.data[j] > best) {
                best = x.data[j];
                best_i = j;
              }
            }
          }
          const std::size_t o = ((b * sy.out + oy) * sx.out + ox) * c + ch;
          out.data[o] = best;
          if (argmax) (*argmax)[o] = best_i;
        }
      }
    }
  }
  return out;
}

Tensor MaxPool::infer(const Tensor& x) const { return pool(x, nullptr); }

Tensor MaxPool::forward(const Tensor& x) {
  input_shape_ = x.shape;
  return pool(x, &argmax_);
}

Tensor MaxPool::backward(const Tensor& g) {
  Tensor dx(input_shape_, 0.0);
  for (std::size_t o = 0; o < g.size(); ++o) dx.data[argmax_[o]] += g.data[o];
  return dx;
}

void MaxPool::describe(std::ostream& os, int indent) const {
  pad_line(os, indent) << "maxpool " << name() << ' ' << k_ << ' ' << stride_ << '\n';
}

// ---------------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::infer(const Tensor& x) const {
  require_rank4(x, *this);
  const std::size_t n = x.dim(0), hw = x.dim(1) * x.dim(2), c = x.dim(3);
  Tensor out({n, c});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t i = 0; i < hw; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) out.data[b * c + ch] += x.data[(b * hw + i) * c + ch];
    }
  }
  for (double& v : out.data) v /= static_cast<double>(hw);
  return out;
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
  input_shape_ = x.shape;
  return infer(x);
}

Tensor GlobalAvgPool::backward(const Tensor& g) {
  Tensor dx(input_shape_);
  const std::size_t n = dx.dim(0), hw = dx.dim(1) * dx.dim(2), c = dx.dim(3);
  const double inv = 1.0 / static_cast<double>(hw);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t i = 0; i < hw; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) dx.data[(b * hw + i) * c + ch] = g.data[b * c + ch] * inv;
    }
  }
  return dx;
}

void GlobalAvgPool::describe(std::ostream& os, int indent) const {
  pad_line(os, indent) << "gap " << name() << '\n';
}

// ---------------------------------------------------------------- Residual

Residual::Residual(std::string name, std::vector<LayerPtr> main, std::vector<LayerPtr> shortcut)
    : Layer(std::move(name)), main_(std::move(main)), shortcut_(std::move(shortcut)) {
  if (main_.empty()) throw InvalidArgument("residual '" + this->name() + "': empty main branch");
}

Shape3 Residual::output_shape(const Shape3& in) const {
  const Shape3 m = chain_shape(main_, in, "residual '" + name() + "' main");
  const Shape3 s = chain_shape(shortcut_, in, "residual '" + name() + "' shortcut");
  if (m != s) {
    throw ShapeError("residual '" + name() + "': branch shapes differ (" + std::to_string(m[0]) +
                     "x" + std::to_string(m[1]) + "x" + std::to_string(m[2]) + " vs " +
                     std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" +
                     std::to_string(s[2]) + ")");
  }
  return m;
}

Tensor Residual::infer(const Tensor& x) const {
  Tensor m = x;
  for (const auto& l : main_) m = l->infer(m);
  Tensor s = x;
  for (const auto& l : shortcut_) s = l->infer(s);
  if (m.shape != s.shape) throw ShapeError("residual '" + name() + "': branch shapes differ");
  for (std::size_t i = 0; i < m.size(); ++i) m.data[i] += s.data[i];
  return m;
}

Tensor Residual::forward(const Tensor& x) {
  Tensor m = x;
  for (auto& l : main_) m = l->forward(m);
  Tensor s = x;
  for (auto& l : shortcut_) s = l->forward(s);
  if (m.shape != s.shape) throw ShapeError("residual '" + name() + "': branch shapes differ");
  for (std::size_t i = 0; i < m.size(); ++i) m.data[i] += s.data[i];
  return m;
}

Tensor Residual::backward(const Tensor& g) {
  Tensor gm = g;
  for (auto it = main_.rbegin(); it != main_.rend(); ++it) gm = (*it)->backward(gm);
  Tensor gs = g;
  for (auto it = shortcut_.rbegin(); it != shortcut_.rend(); ++it) gs = (*it)->backward(gs);
  for (std::size_t i = 0; i < gm.size(); ++i) gm.data[i] += gs.data[i];
  return gm;
}

std::vector<Param*> Residual::params() {
  std::vector<Param*> out;
  for (auto& l : shortcut_) {
    for (Param* p : l->params()) out.push_back(p);
  }
  for (auto& l : main_) {
    for (Param* p : l->params()) out.push_back(p);
  }
  return out;
}

void Residual::init(Rng& rng) {
  for (auto& l : shortcut_) l->init(rng);
  for (auto& l : main_) l->init(rng);
}

void Residual::describe(std::ostream& os, int indent) const {
  pad_line(os, indent) << "residual " << name() << '\n';
  pad_line(os, indent + 1) << "shortcut\n";
  for (const auto& l : shortcut_) l->describe(os, indent + 2);
  pad_line(os, indent + 1) << "main\n";
  for (const auto& l : main_) l->describe(os, indent + 2);
  pad_line(os, indent) << "end\n";
}

}  // namespace liesensor::cnn
