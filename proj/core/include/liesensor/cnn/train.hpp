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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "liesensor/cnn/network.hpp"
#include "liesensor/corpus/corpus.hpp"
#include "liesensor/vision/image.hpp"

namespace liesensor::cnn {

struct Augmentation {
  double shift_px = 4.0;
  double rotate_deg = 10.0;
  bool hflip = true;
  double zoom_pct = 0.1;
  double shear_deg = 0.0;  // available, off by default
};

/// One concrete draw of the augmentation parameters.
struct AugmentDraw {
  bool flip = false;
  double dx = 0.0;
  double dy = 0.0;
  double angle_deg = 0.0;
  double zoom = 1.0;
  double shear_deg = 0.0;
};

/// Draws only the enabled transforms, in the order flip, shift, rotate,
/// zoom, shear.
AugmentDraw draw_augmentation(const Augmentation& config, Rng& rng);

/// Inverse-maps every output pixel through the affine transform about the
/// image center and samples bilinearly with edge replication. Input and
/// output are (H, W, 1).
Tensor apply_augmentation(const Tensor& img, const AugmentDraw& draw);

Tensor augment(const Tensor& img, const Augmentation& config, Rng& rng);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.005;
  double momentum = 0.9;
  /// Overrides every layer's kernel regularizer when set.
  std::optional<double> l2_lambda;
  std::uint64_t seed = 42;
  Augmentation augmentation;
  bool augment = true;
};

struct FaceDataset {
  std::vector<vision::GrayImage> images;
  std::vector<EmotionLabel> labels;

  std::size_t size() const { return images.size(); }
  static FaceDataset from_records(std::span<const corpus::LabeledImage> records);
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  /// NaN when no validation set was given.
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  /// Set when training stopped on a non-finite loss or gradient; `epochs`
  /// then holds the completed epochs only.
  std::optional<std::string> diverged;

  /// `epoch,loss,val_accuracy` lines with a header row.
  void write_csv(std::ostream& os) const;
};

/// Mini-batch SGD with momentum on the mean cross-entropy plus kernel
/// penalty. Shuffling, augmentation and initialization draw from streams
/// derived from config.seed; parameters are rounded to float32 after every
/// step. The network is left in eval mode.
TrainHistory train(Network& net, const FaceDataset& train_set, const FaceDataset& val_set,
                   const TrainConfig& config);

/// Batch tensor (N, H, W, 1) of scaled pixels.
Tensor to_batch(std::span<const vision::GrayImage> images);

struct FacePrediction {
  EmotionLabel label = EmotionLabel::Happiness;
  EmotionScores scores{};
};

/// scale_pixels -> eval forward -> softmax; ties go to the lowest label.
/// The patch must match the network input size.
FacePrediction predict_face(const Network& net, const vision::GrayImage& patch);

double face_accuracy(const Network& net, const FaceDataset& data);

}  // namespace liesensor::cnn
