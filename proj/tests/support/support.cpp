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

#include "support.hpp"

#include <array>
#include <atomic>
#include <mutex>

#include <unistd.h>

#include "liesensor/random.hpp"
#include "liesensor/vision/detect.hpp"

namespace liesensor::test {

namespace fs = std::filesystem;

fs::path fixture_path(const std::string& name) { return fs::path(LIESENSOR_TEST_FIXTURES) / name; }

fs::path cascade_path() {
  return fs::path(LIESENSOR_TEST_DATA) / "cascades" / "haarcascade_frontalface_default.xml";
}

namespace {

const std::array<std::vector<std::string>, kEmotionCount> kKeywords = {{
    {"happy", "joy", "great", "love", "smile", "wonderful", "glad", "awesome"},
    {"sad", "cry", "lonely", "miss", "tears", "gloomy", "sorrow", "heartbroken"},
    {"wow", "shocked", "omg", "unexpected", "suddenly", "unbelievable", "astonished", "whoa"},
    {"hate", "angry", "furious", "awful", "disgusting", "rage", "terrible", "annoyed"},
}};

const std::vector<std::string> kNoise = {
    "the", "a", "today", "work", "home", "this", "that", "just", "really", "my", "day", "night",
    "morning", "friend", "phone", "coffee", "tweet", "school", "weekend", "time", "going", "about",
    "with", "after", "before", "again", "still", "now", "then", "here"};

}  // namespace

std::vector<corpus::LabeledText> synthetic_corpus(std::size_t n, std::uint64_t seed,
                                                  std::size_t signal, std::size_t noise) {
  Rng rng(seed);
  std::vector<corpus::LabeledText> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = label_at(i % kEmotionCount);
    const auto& words = kKeywords[index_of(label)];
    std::vector<std::string> doc;
    for (std::size_t s = 0; s < signal; ++s) doc.push_back(words[rng.index(words.size())]);
    for (std::size_t s = 0; s < noise; ++s) doc.push_back(kNoise[rng.index(kNoise.size())]);
    rng.shuffle(std::span<std::string>(doc));
    std::string content;
    for (const auto& w : doc) content += (content.empty() ? "" : " ") + w;
    out.push_back({std::to_string(i + 1), std::nullopt, content, label});
  }
  return out;
}

cnn::Network tiny_network(cnn::Shape3 input, std::size_t width) {
  using namespace cnn;
  const std::size_t w2 = 2 * width;
  // Running statistics must settle within a few dozen full-batch steps.
  constexpr double kMomentum = 0.9;
  std::vector<LayerPtr> layers;
  layers.push_back(std::make_unique<Conv2D>("stem", 3, input[2], width, 2, Padding::Same, false, 0.0));
  layers.push_back(std::make_unique<BatchNorm>("stem_bn", width, kMomentum));
  layers.push_back(std::make_unique<ReLU>("stem_relu"));
  std::vector<LayerPtr> shortcut;
  shortcut.push_back(std::make_unique<Conv2D>("block_short", 1, width, w2, 2, Padding::Same, false, 0.0));
  shortcut.push_back(std::make_unique<BatchNorm>("block_short_bn", w2, kMomentum));
  std::vector<LayerPtr> main;
  main.push_back(std::make_unique<SepConv2D>("block_sep1", 3, width, w2, 0.0));
  main.push_back(std::make_unique<BatchNorm>("block_bn1", w2, kMomentum));
  main.push_back(std::make_unique<ReLU>("block_relu1"));
  main.push_back(std::make_unique<SepConv2D>("block_sep2", 3, w2, w2, 0.0));
  main.push_back(std::make_unique<BatchNorm>("block_bn2", w2, kMomentum));
  main.push_back(std::make_unique<MaxPool>("block_pool", 3, 2));
  layers.push_back(std::make_unique<Residual>("block", std::move(main), std::move(shortcut)));
  layers.push_back(std::make_unique<Conv2D>("head", 3, w2, kEmotionCount, 1, Padding::Same, true, 0.0));
  layers.push_back(std::make_unique<GlobalAvgPool>("gap"));
  return Network(input, std::move(layers));
}

cnn::FaceDataset constant_dataset(int side, std::size_t copies) {
  cnn::FaceDataset d;
  for (std::size_t c = 0; c < copies; ++c) {
    for (std::size_t k = 0; k < kEmotionCount; ++k) {
      d.images.emplace_back(side, side, static_cast<std::uint8_t>(32 + 64 * k));
      d.labels.push_back(label_at(k));
    }
  }
  return d;
}

cnn::TrainConfig memorize_config(std::size_t epochs) {
  cnn::TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 4;
  c.learning_rate = 0.05;
  c.momentum = 0.9;
  c.seed = 11;
  c.augment = false;
  return c;
}

vision::GrayImage happy_face_patch() {
  const auto img = vision::read_pgm(fixture_path("happy_face.pgm"));
  static const vision::Cascade cascade = vision::load_cascade(cascade_path());
  const auto boxes = vision::detect_faces(img, cascade);
  if (boxes.empty()) throw std::runtime_error("fixture face not detected");
  return vision::crop_face(img, boxes.front());
}

namespace {

vision::GrayImage flipped_vertically(const vision::GrayImage& g) {
  vision::GrayImage out(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) out.at(x, y) = g.at(x, g.height - 1 - y);
  return out;
}

vision::GrayImage inverted(const vision::GrayImage& g) {
  vision::GrayImage out = g;
  for (auto& p : out.data) p = static_cast<std::uint8_t>(255 - p);
  return out;
}

FixtureModels build_fixture_models() {
  textclf::TextTrainingConfig tcfg;
  tcfg.split = {0.8, 5};
  tcfg.linear.seed = 5;
  tcfg.forest.seed = 5;
  tcfg.forest.n_trees = 20;
  const auto corpus = synthetic_corpus(400, 5);
  auto text = textclf::train_text_pipeline(corpus, tcfg);

  const auto happy = happy_face_patch();
  cnn::FaceDataset faces;
  faces.images = {happy, flipped_vertically(happy), inverted(happy),
                  vision::GrayImage(happy.width, happy.height, 128)};
  faces.labels = {EmotionLabel::Happiness, EmotionLabel::Sadness, EmotionLabel::Surprise,
                  EmotionLabel::Hate};
  cnn::Network net = tiny_network({48, 48, 1});
  net.init(3);
  cnn::train(net, faces, faces, memorize_config(60));

  return {std::move(text.bundle), std::move(net), vision::load_cascade(cascade_path())};
}

}  // namespace

const FixtureModels& fixture_models() {
  static const FixtureModels models = build_fixture_models();
  return models;
}

vision::GrayImage random_image(int w, int h, std::uint64_t seed, int lo, int hi) {
  Rng rng(seed);
  vision::GrayImage img(w, h);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(lo + static_cast<int>(rng.index(hi - lo + 1)));
  return img;
}

fs::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("liesensor-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace liesensor::test
