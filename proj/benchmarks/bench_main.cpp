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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "liesensor/cnn/network.hpp"
#include "liesensor/cnn/train.hpp"
#include "liesensor/random.hpp"
#include "liesensor/textclf/bundle.hpp"
#include "liesensor/vision/cascade.hpp"
#include "liesensor/vision/detect.hpp"
#include "liesensor/vision/image.hpp"

using namespace liesensor;

namespace {

vision::GrayImage noise_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  vision::GrayImage img(w, h, 0);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(rng.index(256));
  return img;
}

const vision::Cascade& cascade() {
  static const auto c = vision::load_cascade(LIESENSOR_BENCH_CASCADE);
  return c;
}

std::vector<corpus::LabeledText> corpus_of(std::size_t n) {
  static const std::vector<std::vector<std::string>> words = {
      {"happy", "joy", "love", "great", "smile"},
      {"sad", "lonely", "cry", "miss", "tears"},
      {"wow", "omg", "shocked", "unbelievable", "surprised"},
      {"hate", "angry", "furious", "worst", "annoyed"}};
  static const std::vector<std::string> filler = {"the", "day", "today", "people", "work", "home", "time"};
  Rng rng(7);
  std::vector<corpus::LabeledText> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = i % 4;
    std::string text = words[k][rng.index(5)];
    for (int j = 0; j < 5; ++j) text += " " + filler[rng.index(filler.size())];
    out.push_back({std::to_string(i), std::nullopt, text, label_at(k)});
  }
  return out;
}

}  // namespace

static void BM_IntegralImage(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = noise_image(side, side, 1);
  for (auto _ : state) benchmark::DoNotOptimize(vision::IntegralImage(img));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_IntegralImage)->Arg(48)->Arg(320)->Arg(640);

static void BM_DetectFaces(benchmark::State& state) {
  const auto img = vision::read_pgm(LIESENSOR_BENCH_FACE);
  const auto& c = cascade();
  for (auto _ : state) benchmark::DoNotOptimize(vision::detect_faces(img, c));
}
BENCHMARK(BM_DetectFaces)->Unit(benchmark::kMillisecond);

static void BM_DetectNoise(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = noise_image(side, side, 2);
  const auto& c = cascade();
  for (auto _ : state) benchmark::DoNotOptimize(vision::detect_faces(img, c));
}
BENCHMARK(BM_DetectNoise)->Arg(160)->Arg(320)->Unit(benchmark::kMillisecond);

static void BM_NetworkInfer(benchmark::State& state) {
  cnn::MiniXceptionSpec spec;
  spec.width_multiplier = static_cast<double>(state.range(0)) / 100.0;
  cnn::Network net = cnn::mini_xception(spec);
  net.init(1);
  net.set_mode(cnn::Mode::Eval);
  const auto face = noise_image(48, 48, 3);
  for (auto _ : state) benchmark::DoNotOptimize(cnn::predict_face(net, face));
}
BENCHMARK(BM_NetworkInfer)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_NetworkTrainStep(benchmark::State& state) {
  cnn::Network net = cnn::mini_xception();
  net.init(1);
  std::vector<vision::GrayImage> faces;
  std::vector<EmotionLabel> labels;
  for (std::size_t i = 0; i < 32; ++i) {
    faces.push_back(noise_image(48, 48, 10 + i));
    labels.push_back(label_at(i % 4));
  }
  const Tensor batch = cnn::to_batch(faces);
  net.set_mode(cnn::Mode::Train);
  for (auto _ : state) {
    net.zero_grad();
    const auto loss = cnn::softmax_cross_entropy(net.forward(batch), labels);
    net.backward(loss.grad_logits);
    benchmark::DoNotOptimize(loss.loss);
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_NetworkTrainStep)->Unit(benchmark::kMillisecond);

static void BM_TextPredict(benchmark::State& state) {
  const auto docs = corpus_of(2000);
  const auto trained = textclf::train_text_pipeline(docs, textclf::TextTrainingConfig{});
  const std::string message = "omg what a day, I can not believe the people at work today";
  for (auto _ : state) benchmark::DoNotOptimize(trained.bundle.predict(message));
}
BENCHMARK(BM_TextPredict);

static void BM_TextTrain(benchmark::State& state) {
  const auto docs = corpus_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(textclf::train_text_pipeline(docs, textclf::TextTrainingConfig{}));
}
BENCHMARK(BM_TextTrain)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
