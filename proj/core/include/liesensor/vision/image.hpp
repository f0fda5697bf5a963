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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "liesensor/tensor.hpp"

namespace liesensor::vision {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool empty() const { return width == 0 || height == 0; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Axis-aligned box in source pixels. `score` is the number of cascade
/// stages passed; `hits` the number of raw windows merged into the box.
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  int score = 0;
  int hits = 1;

  long long area() const { return static_cast<long long>(w) * h; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection over union; 0 for disjoint or degenerate boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

// PGM (P5, maxval <= 255). Comments and arbitrary whitespace in the header
// are accepted; a maxval below 255 is rescaled to the full 8-bit range.
GrayImage decode_pgm(std::string_view bytes);
std::string encode_pgm(const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Raw 8-bit gray bytes with externally supplied dimensions.
GrayImage from_raw_gray(std::span<const std::uint8_t> bytes, int width, int height);
GrayImage read_raw_gray(const std::filesystem::path& path, int width, int height);

/// v = (p/255 - 0.5) * 2, shaped (h, w, 1).
Tensor scale_pixels(const GrayImage& img);
double scale_pixel(std::uint8_t p);

/// Bilinear resample of the box region to out_w x out_h. Sample centers map
/// as src = box.x + (dst + 0.5) * box.w / out_w - 0.5, clamped to the box.
/// Throws InvalidArgument when the box leaves the image.
GrayImage resample_bilinear(const GrayImage& img, const BoundingBox& box, int out_w, int out_h);

inline constexpr int kFacePatchSize = 48;

/// Crop + bilinear resample to 48x48.
GrayImage crop_face(const GrayImage& img, const BoundingBox& box);

}  // namespace liesensor::vision
