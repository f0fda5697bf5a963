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

#include "liesensor/cnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "liesensor/error.hpp"

namespace liesensor::cnn {

namespace {

constexpr std::uint64_t kShuffleStream = 1 << 20;
constexpr std::uint64_t kAugmentStream = 2 << 20;

bool is_kernel(const Param& p) {
  const auto ends = [&](std::string_view s) {
    return p.name.size() >= s.size() && p.name.compare(p.name.size() - s.size(), s.size(), s) == 0;
  };
  return ends(".kernel") || ends(".depthwise") || ends(".pointwise");
}

double sample_clamped(const Tensor& img, double sx, double sy) {
  const std::size_t h = img.dim(0), w = img.dim(1);
  sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
  const auto x0 = static_cast<std::size_t>(sx), y0 = static_cast<std::size_t>(sy);
  const std::size_t x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double tx = sx - static_cast<double>(x0), ty = sy - static_cast<double>(y0);
  const double top = img.data[y0 * w + x0] * (1 - tx) + img.data[y0 * w + x1] * tx;
  const double bot = img.data[y1 * w + x0] * (1 - tx) + img.data[y1 * w + x1] * tx;
  return top * (1 - ty) + bot * ty;
}

void check_dataset(const FaceDataset& d, const Shape3& in, const char* what) {
  if (d.images.size() != d.labels.size()) {
    throw InvalidArgument(std::string(what) + ": image/label count mismatch");
  }
  for (const auto& img : d.images) {
    if (static_cast<std::size_t>(img.height) != in[0] || static_cast<std::size_t>(img.width) != in[1]) {
      throw ShapeError(std::string(what) + ": image " + std::to_string(img.width) + "x" +
                       std::to_string(img.height) + " does not match network input " +
                       std::to_string(in[1]) + "x" + std::to_string(in[0]));
    }
  }
}

}  // namespace

AugmentDraw draw_augmentation(const Augmentation& c, Rng& rng) {
  AugmentDraw d;
  if (c.hflip) d.flip = rng.coin();
  if (c.shift_px > 0) {
    d.dx = rng.uniform(-c.shift_px, c.shift_px);
    d.dy = rng.uniform(-c.shift_px, c.shift_px);
  }
  if (c.rotate_deg > 0) d.angle_deg = rng.uniform(-c.rotate_deg, c.rotate_deg);
  if (c.zoom_pct > 0) d.zoom = rng.uniform(1.0 - c.zoom_pct, 1.0 + c.zoom_pct);
  if (c.shear_deg > 0) d.shear_deg = rng.uniform(-c.shear_deg, c.shear_deg);
  return d;
}

Tensor apply_augmentation(const Tensor& img, const AugmentDraw& d) {
  if (img.rank() != 3 || img.dim(2) != 1) {
    throw ShapeError("augment: expected (H, W, 1) image, got " + img.shape_string());
  }
  if (!(d.zoom > 0)) throw InvalidArgument("augment: zoom must be positive");
  const std::size_t h = img.dim(0), w = img.dim(1);
  const double cx = (static_cast<double>(w) - 1) / 2, cy = (static_cast<double>(h) - 1) / 2;
  const double theta = d.angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  const double shear = std::tan(d.shear_deg * std::numbers::pi / 180.0);
  Tensor out(img.shape);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double u = (static_cast<double>(x) - cx - d.dx) / d.zoom;
      const double v = (static_cast<double>(y) - cy - d.dy) / d.zoom;
      double ru = c * u + s * v;
      const double rv = -s * u + c * v;
      ru -= shear * rv;
      if (d.flip) ru = -ru;
      out.data[y * w + x] = sample_clamped(img, cx + ru, cy + rv);
    }
  }
  return out;
}

Tensor augment(const Tensor& img, const Augmentation& config, Rng& rng) {
  return apply_augmentation(img, draw_augmentation(config, rng));
}

FaceDataset FaceDataset::from_records(std::span<const corpus::LabeledImage> records) {
  FaceDataset d;
  d.images.reserve(records.size());
  d.labels.reserve(records.size());
  for (const auto& r : records) {
    vision::GrayImage img(corpus::kFerSide, corpus::kFerSide);
    std::copy(r.pixels.begin(), r.pixels.end(), img.data.begin());
    d.images.push_back(std::move(img));
    d.labels.push_back(r.label);
  }
  return d;
}

void TrainHistory::write_csv(std::ostream& os) const {
  os << "epoch,loss,val_accuracy\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << e.loss << ',';
    if (std::isnan(e.val_accuracy)) {
      os << "nan";
    } else {
      os << e.val_accuracy;
    }
    os << '\n';
  }
}

Tensor to_batch(std::span<const vision::GrayImage> images) {
  if (images.empty()) throw InvalidArgument("to_batch: no images");
  const auto h = static_cast<std::size_t>(images[0].height), w = static_cast<std::size_t>(images[0].width);
  Tensor batch({images.size(), h, w, 1});
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (static_cast<std::size_t>(images[i].height) != h || static_cast<std::size_t>(images[i].width) != w) {
      throw ShapeError("to_batch: images differ in size");
    }
    for (std::size_t j = 0; j < h * w; ++j) batch.data[i * h * w + j] = vision::scale_pixel(images[i].data[j]);
  }
  return batch;
}

TrainHistory train(Network& net, const FaceDataset& train_set, const FaceDataset& val_set,
                   const TrainConfig& config) {
  if (net.class_count() != kEmotionCount) {
    throw InvalidArgument("train: network must output " + std::to_string(kEmotionCount) + " classes");
  }
  if (train_set.size() == 0) throw InvalidArgument("train: empty training set");
  if (config.batch_size == 0 || config.learning_rate < 0 || config.momentum < 0 ||
      config.l2_lambda.value_or(0.0) < 0) {
    throw InvalidArgument("train: invalid configuration");
  }
  const Shape3 in = net.input_shape();
  if (in[2] != 1) throw ShapeError("train: network input must have one channel");
  check_dataset(train_set, in, "train");
  check_dataset(val_set, in, "validation");

  TrainHistory history;
  if (config.epochs == 0) return history;

  const auto params = net.params();
  if (config.l2_lambda) {
    for (Param* p : params) {
      if (p->trainable && is_kernel(*p)) p->l2 = *config.l2_lambda;
    }
  }
  std::vector<Tensor> velocity;
  velocity.reserve(params.size());
  for (const Param* p : params) velocity.emplace_back(p->trainable ? p->value.shape : std::vector<std::size_t>{});

  const std::size_t n = train_set.size(), hw = in[0] * in[1];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng = Rng::derive(config.seed, kShuffleStream + epoch);
    Rng aug_rng = Rng::derive(config.seed, kAugmentStream + epoch);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    try {
      for (std::size_t start = 0; start < n; start += config.batch_size) {
        const std::size_t end = std::min(n, start + config.batch_size);
        Tensor batch({end - start, in[0], in[1], 1});
        std::vector<EmotionLabel> labels;
        labels.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
          const vision::GrayImage& img = train_set.images[order[i]];
          Tensor x = vision::scale_pixels(img);
          if (config.augment) x = augment(x, config.augmentation, aug_rng);
          std::copy(x.data.begin(), x.data.end(), batch.data.begin() + static_cast<std::ptrdiff_t>((i - start) * hw));
          labels.push_back(train_set.labels[order[i]]);
        }
        net.set_mode(Mode::Train);
        const Tensor logits = net.forward(batch);
        const SoftmaxLoss sl = softmax_cross_entropy(logits, labels);
        const double loss = sl.loss + net.l2_penalty();
        if (!std::isfinite(loss)) {
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(start / config.batch_size));
        }
        net.zero_grad();
        net.backward(sl.grad_logits);
        net.add_l2_grad();
        for (std::size_t k = 0; k < params.size(); ++k) {
          Param& p = *params[k];
          if (!p.trainable) continue;
          Tensor& v = velocity[k];
          for (std::size_t i = 0; i < p.value.size(); ++i) {
            v.data[i] = config.momentum * v.data[i] - config.learning_rate * p.grad.data[i];
            p.value.data[i] += v.data[i];
          }
          round_to_float(p.value);
        }
        loss_sum += loss * static_cast<double>(end - start);
      }
    } catch (const DivergenceError& e) {
      net.set_mode(Mode::Eval);
      history.diverged = e.what();
      return history;
    }
    net.set_mode(Mode::Eval);
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(n);
    stats.val_accuracy = val_set.size() ? face_accuracy(net, val_set) : std::numeric_limits<double>::quiet_NaN();
    history.epochs.push_back(stats);
  }
  return history;
}

FacePrediction predict_face(const Network& net, const vision::GrayImage& patch) {
  const Shape3& in = net.input_shape();
  if (static_cast<std::size_t>(patch.height) != in[0] || static_cast<std::size_t>(patch.width) != in[1] ||
      in[2] != 1) {
    throw ShapeError("predict_face: patch " + std::to_string(patch.width) + "x" +
                     std::to_string(patch.height) + " does not match network input");
  }
  if (net.class_count() != kEmotionCount) throw ShapeError("predict_face: network must have 4 classes");
  const Tensor logits = net.infer(to_batch(std::span(&patch, 1)));
  const double top = *std::max_element(logits.data.begin(), logits.data.end());
  FacePrediction out;
  double sum = 0.0;
  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    out.scores[k] = std::exp(logits.data[k] - top);
    sum += out.scores[k];
  }
  for (double& s : out.scores) s /= sum;
  out.label = argmax_label(out.scores);
  return out;
}

double face_accuracy(const Network& net, const FaceDataset& data) {
  if (data.size() == 0) throw InvalidArgument("face_accuracy: empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict_face(net, data.images[i]).label == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace liesensor::cnn
