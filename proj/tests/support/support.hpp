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
#include <string>
#include <vector>

#include "liesensor/cnn/network.hpp"
#include "liesensor/cnn/train.hpp"
#include "liesensor/corpus/corpus.hpp"
#include "liesensor/textclf/bundle.hpp"
#include "liesensor/vision/cascade.hpp"
#include "liesensor/vision/image.hpp"

namespace liesensor::test {

std::filesystem::path fixture_path(const std::string& name);
std::filesystem::path cascade_path();

/// 4-class corpus: every document draws `signal` words from its class's
/// keyword list and `noise` words from a shared pool.
std::vector<corpus::LabeledText> synthetic_corpus(std::size_t n, std::uint64_t seed,
                                                  std::size_t signal = 2, std::size_t noise = 4);

/// conv-BN-ReLU, one residual separable module, conv head, GAP. Small enough
/// for gradient checks and second-scale training.
cnn::Network tiny_network(cnn::Shape3 input = {48, 48, 1}, std::size_t width = 4);

/// One constant image per label (gray levels 32, 96, 160, 224), `copies`
/// each.
cnn::FaceDataset constant_dataset(int side, std::size_t copies = 1);

/// SGD setup that memorizes constant_dataset with tiny_network.
cnn::TrainConfig memorize_config(std::size_t epochs = 50);

/// The 48x48 patch verify_message cuts from happy_face.pgm.
vision::GrayImage happy_face_patch();

/// Models shared by end-to-end tests. The text bundle is trained on
/// synthetic_corpus; the face network memorizes the happy fixture patch as
/// Happiness and three transformed patches as the other labels.
struct FixtureModels {
  textclf::TextBundle bundle;
  cnn::Network network;
  vision::Cascade cascade;
};
const FixtureModels& fixture_models();

/// Random gray image with values in [lo, hi].
vision::GrayImage random_image(int w, int h, std::uint64_t seed, int lo = 0, int hi = 255);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace liesensor::test
