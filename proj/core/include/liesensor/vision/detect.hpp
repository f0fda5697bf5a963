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
#include <vector>

#include "liesensor/vision/cascade.hpp"
#include "liesensor/vision/image.hpp"

namespace liesensor::vision {

/// Summed-area tables of (width+1) x (height+1) entries; row 0 and column 0
/// are zero. Sums are exact 64-bit integers.
class IntegralImage {
 public:
  IntegralImage() = default;
  explicit IntegralImage(const GrayImage& img);

  int width() const { return width_; }
  int height() const { return height_; }

  /// S(x, y) = sum of pixels in [0,x) x [0,y).
  std::uint64_t S(int x, int y) const { return sum_[index(x, y)]; }
  std::uint64_t S2(int x, int y) const { return sqsum_[index(x, y)]; }

  std::uint64_t sum(int x, int y, int w, int h) const {
    return S(x + w, y + h) - S(x, y + h) - S(x + w, y) + S(x, y);
  }
  std::uint64_t sqsum(int x, int y, int w, int h) const {
    return S2(x + w, y + h) - S2(x, y + h) - S2(x + w, y) + S2(x, y);
  }

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * (width_ + 1) + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> sum_;
  std::vector<std::uint64_t> sqsum_;
};

IntegralImage integral_image(const GrayImage& img);

struct DetectParams {
  double scale_factor = 1.1;
  int step = 1;
  int min_size = 0;  // 0: cascade window
  int max_size = 0;  // 0: whole image
  int min_neighbors = 2;
  double merge_iou = 0.3;
  /// Windows whose (inset) pixel stddev is below this are skipped.
  double min_stddev = 1.0;
  bool largest_only = true;
};

/// One level of the detection pyramid: the cascade with every rectangle
/// rescaled to the level's window size.
struct ScaledCascade {
  double scale = 1.0;
  int window_w = 0;
  int window_h = 0;
  /// Variance normalization rectangle (window inset by one base pixel).
  HaarRect norm_rect;
  Cascade cascade;
};

/// Rounds rect edges independently so adjacent rects keep sharing edges;
/// the first rect's weight is re-balanced when the base feature was
/// zero-sum so it stays zero-sum after rounding.
ScaledCascade scale_cascade(const Cascade& cascade, double scale);

/// Pyramid scales from the parameters: scale_factor^k while the window fits
/// the image and stays within [min_size, max_size].
std::vector<double> pyramid_scales(const Cascade& cascade, int image_w, int image_h,
                                   const DetectParams& params);

/// Number of stages passed by the window at (x, y); equals the stage count
/// when the window is accepted and 0 for rejected low-variance windows.
int evaluate_window(const IntegralImage& ii, const ScaledCascade& sc, int x, int y,
                    double min_stddev);

/// Accepted windows before merging, ordered by (level, y, x).
std::vector<BoundingBox> detect_raw(const GrayImage& img, const Cascade& cascade,
                                    const DetectParams& params = {});

/// Greedy grouping: each box joins the first group whose seed box has
/// IoU > merge_iou, else starts a new group. Groups with fewer than
/// min_neighbors hits are dropped; survivors are the rounded mean of their
/// members, sorted by area (descending) then (y, x).
std::vector<BoundingBox> merge_detections(const std::vector<BoundingBox>& raw,
                                          const DetectParams& params = {});

/// detect_raw + merge_detections; keeps only the largest box when
/// params.largest_only.
std::vector<BoundingBox> detect_faces(const GrayImage& img, const Cascade& cascade,
                                      const DetectParams& params = {});

}  // namespace liesensor::vision
