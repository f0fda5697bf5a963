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

#include "liesensor/vision/detect.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "liesensor/error.hpp"

namespace liesensor::vision {

namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

HaarRect scale_rect(const HaarRect& r, double s) {
  const int x0 = round_half_up(r.x * s), x1 = round_half_up((r.x + r.w) * s);
  const int y0 = round_half_up(r.y * s), y1 = round_half_up((r.y + r.h) * s);
  return {x0, y0, x1 - x0, y1 - y0, r.weight};
}

double weighted_area(const std::vector<HaarRect>& rects, std::size_t from) {
  double acc = 0.0;
  for (std::size_t i = from; i < rects.size(); ++i) {
    acc += rects[i].weight * static_cast<double>(rects[i].w) * rects[i].h;
  }
  return acc;
}

constexpr int kMaxLevels = 512;

}  // namespace

IntegralImage::IntegralImage(const GrayImage& img)
    : width_(img.width),
      height_(img.height),
      sum_(static_cast<std::size_t>(img.width + 1) * (img.height + 1), 0),
      sqsum_(sum_.size(), 0) {
  for (int y = 0; y < height_; ++y) {
    std::uint64_t row = 0, row2 = 0;
    for (int x = 0; x < width_; ++x) {
      const std::uint64_t p = img.at(x, y);
      row += p;
      row2 += p * p;
      sum_[index(x + 1, y + 1)] = sum_[index(x + 1, y)] + row;
      sqsum_[index(x + 1, y + 1)] = sqsum_[index(x + 1, y)] + row2;
    }
  }
}

IntegralImage integral_image(const GrayImage& img) { return IntegralImage(img); }

ScaledCascade scale_cascade(const Cascade& cascade, double scale) {
  ScaledCascade sc;
  sc.scale = scale;
  sc.window_w = round_half_up(cascade.window_w * scale);
  sc.window_h = round_half_up(cascade.window_h * scale);
  const HaarRect base_norm{1, 1, cascade.window_w - 2, cascade.window_h - 2, 1.0};
  sc.norm_rect = scale_rect(base_norm, scale);
  sc.cascade.window_w = sc.window_w;
  sc.cascade.window_h = sc.window_h;
  sc.cascade.stages.reserve(cascade.stages.size());
  for (const auto& stage : cascade.stages) {
    CascadeStage out{stage.threshold, {}};
    out.weak.reserve(stage.weak.size());
    for (const auto& weak : stage.weak) {
      WeakClassifier w = weak;
      for (auto& r : w.rects) r = scale_rect(r, scale);
      const bool zero_sum = weighted_area(weak.rects, 0) == 0.0;
      if (zero_sum && w.rects.size() > 1 && weighted_area(w.rects, 0) != 0.0) {
        const double a0 = static_cast<double>(w.rects[0].w) * w.rects[0].h;
        w.rects[0].weight = -weighted_area(w.rects, 1) / a0;
      }
      out.weak.push_back(std::move(w));
    }
    sc.cascade.stages.push_back(std::move(out));
  }
  return sc;
}

std::vector<double> pyramid_scales(const Cascade& cascade, int image_w, int image_h,
                                   const DetectParams& params) {
  if (!(params.scale_factor > 1.0)) throw InvalidArgument("detect: scale_factor must be > 1");
  if (params.step < 1) throw InvalidArgument("detect: step must be >= 1");
  const int min_size = params.min_size > 0 ? params.min_size : 0;
  std::vector<double> scales;
  double s = 1.0;
  for (int k = 0; k < kMaxLevels; ++k, s *= params.scale_factor) {
    const int w = round_half_up(cascade.window_w * s);
    const int h = round_half_up(cascade.window_h * s);
    if (w > image_w || h > image_h) break;
    if (params.max_size > 0 && std::max(w, h) > params.max_size) break;
    if (std::min(w, h) < min_size) continue;
    scales.push_back(s);
  }
  return scales;
}

int evaluate_window(const IntegralImage& ii, const ScaledCascade& sc, int x, int y,
                    double min_stddev) {
  const HaarRect& nr = sc.norm_rect;
  const double area = static_cast<double>(nr.w) * nr.h;
  const double sum = static_cast<double>(ii.sum(x + nr.x, y + nr.y, nr.w, nr.h));
  const double sq = static_cast<double>(ii.sqsum(x + nr.x, y + nr.y, nr.w, nr.h));
  const double var_num = area * sq - sum * sum;
  if (var_num <= 0.0) return 0;
  const double nf = std::sqrt(var_num);
  if (nf / area < min_stddev) return 0;

  int passed = 0;
  for (const auto& stage : sc.cascade.stages) {
    double acc = 0.0;
    for (const auto& weak : stage.weak) {
      double f = 0.0;
      for (const auto& r : weak.rects) {
        f += r.weight * static_cast<double>(ii.sum(x + r.x, y + r.y, r.w, r.h));
      }
      acc += (f / nf < weak.threshold) ? weak.left_value : weak.right_value;
    }
    if (acc < stage.threshold) return passed;
    ++passed;
  }
  return passed;
}

std::vector<BoundingBox> detect_raw(const GrayImage& img, const Cascade& cascade,
                                    const DetectParams& params) {
  std::vector<BoundingBox> hits;
  if (img.width < cascade.window_w || img.height < cascade.window_h) return hits;
  const auto scales = pyramid_scales(cascade, img.width, img.height, params);
  if (scales.empty()) return hits;
  const IntegralImage ii(img);
  const int stage_count = static_cast<int>(cascade.stages.size());
  for (const double s : scales) {
    const ScaledCascade sc = scale_cascade(cascade, s);
    for (int y = 0; y + sc.window_h <= img.height; y += params.step) {
      for (int x = 0; x + sc.window_w <= img.width; x += params.step) {
        const int n = evaluate_window(ii, sc, x, y, params.min_stddev);
        if (n == stage_count) hits.push_back({x, y, sc.window_w, sc.window_h, n, 1});
      }
    }
  }
  return hits;
}

std::vector<BoundingBox> merge_detections(const std::vector<BoundingBox>& raw,
                                          const DetectParams& params) {
  struct Group {
    BoundingBox seed;
    long long sx = 0, sy = 0, sw = 0, sh = 0;
    int members = 0;
    int hits = 0;
    int score = 0;
  };
  std::vector<Group> groups;
  for (const auto& b : raw) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return iou(g.seed, b) > params.merge_iou; });
    if (it == groups.end()) {
      groups.push_back({b});
      it = std::prev(groups.end());
    }
    it->sx += b.x;
    it->sy += b.y;
    it->sw += b.w;
    it->sh += b.h;
    it->members += 1;
    it->hits += b.hits;
    it->score = std::max(it->score, b.score);
  }
  std::vector<BoundingBox> out;
  for (const auto& g : groups) {
    if (g.hits < params.min_neighbors) continue;
    const double m = g.members;
    out.push_back({round_half_up(g.sx / m), round_half_up(g.sy / m), round_half_up(g.sw / m),
                   round_half_up(g.sh / m), g.score, g.hits});
  }
  std::stable_sort(out.begin(), out.end(), [](const BoundingBox& a, const BoundingBox& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return out;
}

std::vector<BoundingBox> detect_faces(const GrayImage& img, const Cascade& cascade,
                                      const DetectParams& params) {
  auto boxes = merge_detections(detect_raw(img, cascade, params), params);
  for (auto& b : boxes) {  // per-coordinate rounding can overshoot by a pixel
    b.w = std::min(b.w, img.width - b.x);
    b.h = std::min(b.h, img.height - b.y);
  }
  if (params.largest_only && boxes.size() > 1) boxes.resize(1);
  return boxes;
}

}  // namespace liesensor::vision
