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

#include "liesensor/vision/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "liesensor/binary_io.hpp"
#include "liesensor/error.hpp"

namespace liesensor::vision {

namespace {

constexpr int kMaxDimension = 1 << 14;

void check_dims(int w, int h, const char* what) {
  if (w <= 0 || h <= 0 || w > kMaxDimension || h > kMaxDimension) {
    throw DataError(std::string(what) + ": unsupported dimensions " + std::to_string(w) + "x" +
                    std::to_string(h));
  }
}

class PgmHeader {
 public:
  explicit PgmHeader(std::string_view b) : b_(b) {}

  int next_int(const char* field) {
    skip_space_and_comments();
    std::size_t start = pos_;
    long long v = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > kMaxDimension * 4LL) throw DataError(std::string("pgm: ") + field + " too large");
      ++pos_;
    }
    if (pos_ == start) throw DataError(std::string("pgm: missing ") + field);
    return static_cast<int>(v);
  }

  /// Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_]))) {
      throw DataError("pgm: expected whitespace before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const char c = b_[pos_];
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view b_;
  std::size_t pos_ = 2;
};

}  // namespace

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), data(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill) {}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const long long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

GrayImage decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw DataError("pgm: missing P5 magic");
  }
  PgmHeader header(bytes);
  const int w = header.next_int("width");
  const int h = header.next_int("height");
  const int maxval = header.next_int("maxval");
  check_dims(w, h, "pgm");
  if (maxval < 1 || maxval > 255) {
    throw DataError("pgm: maxval " + std::to_string(maxval) + " outside 1..255");
  }
  const std::size_t off = header.raster_offset();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < off + n) {
    throw DataError("pgm: raster has " + std::to_string(bytes.size() - std::min(off, bytes.size())) +
                    " bytes, expected " + std::to_string(n));
  }
  GrayImage img(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    const int p = static_cast<unsigned char>(bytes[off + i]);
    if (p > maxval) throw DataError("pgm: sample " + std::to_string(p) + " exceeds maxval");
    img.data[i] = maxval == 255 ? static_cast<std::uint8_t>(p)
                                : static_cast<std::uint8_t>((p * 255 + maxval / 2) / maxval);
  }
  return img;
}

std::string encode_pgm(const GrayImage& img) {
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw InvalidArgument("encode_pgm: data length does not match dimensions");
  }
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  return out;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(binary::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  binary::write_file(path, encode_pgm(img));
}

GrayImage from_raw_gray(std::span<const std::uint8_t> bytes, int width, int height) {
  check_dims(width, height, "raw gray");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() != n) {
    throw DataError("raw gray: " + std::to_string(bytes.size()) + " bytes for " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  GrayImage img(width, height);
  std::copy(bytes.begin(), bytes.end(), img.data.begin());
  return img;
}

GrayImage read_raw_gray(const std::filesystem::path& path, int width, int height) {
  const std::string raw = binary::read_file(path);
  return from_raw_gray({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()}, width,
                       height);
}

double scale_pixel(std::uint8_t p) { return (static_cast<double>(p) / 255.0 - 0.5) * 2.0; }

Tensor scale_pixels(const GrayImage& img) {
  Tensor t({static_cast<std::size_t>(img.height), static_cast<std::size_t>(img.width), 1});
  for (std::size_t i = 0; i < img.data.size(); ++i) t.data[i] = scale_pixel(img.data[i]);
  return t;
}

GrayImage resample_bilinear(const GrayImage& img, const BoundingBox& box, int out_w, int out_h) {
  if (box.w <= 0 || box.h <= 0 || box.x < 0 || box.y < 0 || box.x + box.w > img.width ||
      box.y + box.h > img.height) {
    throw InvalidArgument("crop: box (" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
                          std::to_string(box.w) + "," + std::to_string(box.h) +
                          ") outside image " + std::to_string(img.width) + "x" +
                          std::to_string(img.height));
  }
  if (out_w <= 0 || out_h <= 0) throw InvalidArgument("crop: output size must be positive");

  const double sx = static_cast<double>(box.w) / out_w;
  const double sy = static_cast<double>(box.h) / out_h;
  GrayImage out(out_w, out_h);
  for (int dy = 0; dy < out_h; ++dy) {
    const double fy = std::clamp((dy + 0.5) * sy - 0.5, 0.0, static_cast<double>(box.h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, box.h - 1);
    const double ty = fy - y0;
    for (int dx = 0; dx < out_w; ++dx) {
      const double fx = std::clamp((dx + 0.5) * sx - 0.5, 0.0, static_cast<double>(box.w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, box.w - 1);
      const double tx = fx - x0;
      const double top = img.at(box.x + x0, box.y + y0) * (1 - tx) + img.at(box.x + x1, box.y + y0) * tx;
      const double bot = img.at(box.x + x0, box.y + y1) * (1 - tx) + img.at(box.x + x1, box.y + y1) * tx;
      const double v = top * (1 - ty) + bot * ty;
      out.at(dx, dy) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

GrayImage crop_face(const GrayImage& img, const BoundingBox& box) {
  return resample_bilinear(img, box, kFacePatchSize, kFacePatchSize);
}

}  // namespace liesensor::vision
