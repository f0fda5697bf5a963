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

// liesensor: train the text and face models, verify single messages,
// evaluate fixture sets and run the HTTP service.

#include <spdlog/spdlog.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "liesensor/binary_io.hpp"
#include "liesensor/cnn/train.hpp"
#include "liesensor/corpus/corpus.hpp"
#include "liesensor/error.hpp"
#include "liesensor/service/service.hpp"
#include "liesensor/textclf/bundle.hpp"
#include "liesensor/verifier/verifier.hpp"
#include "liesensor/vision/detect.hpp"

#ifndef LIESENSOR_INSTALLED_CASCADE
#define LIESENSOR_INSTALLED_CASCADE "haarcascade_frontalface_default.xml"
#endif
#ifndef LIESENSOR_SOURCE_CASCADE
#define LIESENSOR_SOURCE_CASCADE LIESENSOR_INSTALLED_CASCADE
#endif

namespace {

using namespace liesensor;

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct TextArgs {
  std::string csv, out, features = "count", labels;
  std::uint64_t min_count = 2, seed = 42;
  double train_fraction = 0.8;
};

struct FaceArgs {
  std::string csv, out, history;
  std::size_t epochs = 10, batch = 32, limit = 0;
  double lr = 0.005, width = 0.5, train_fraction = 0.8;
  std::uint64_t seed = 42;
  bool no_augment = false;
};

// Installed copy first, then the source tree (uninstalled builds).
std::string default_cascade() {
  std::error_code ec;
  if (std::filesystem::exists(LIESENSOR_INSTALLED_CASCADE, ec)) return LIESENSOR_INSTALLED_CASCADE;
  return LIESENSOR_SOURCE_CASCADE;
}

struct ModelArgs {
  std::string bundle, weights, cascade = default_cascade();
};

struct VerifyArgs {
  std::string text, image, raw_size;
  bool record = false;
};

struct EvalArgs {
  std::string fixtures;
};

int run_train_text(const TextArgs& a) {
  const auto labels = a.labels.empty() ? corpus::LabelMap::defaults()
                                       : corpus::LabelMap::with_overrides(corpus::LabelMap::defaults(), a.labels);
  const auto loaded = corpus::load_tweet_csv(a.csv, labels);
  std::cerr << "load report: " << loaded.report.to_json() << "\n";
  textclf::TextTrainingConfig cfg;
  const auto kind = features::parse_feature_kind(a.features);
  if (!kind) throw InvalidArgument("--features must be count or tfidf");
  cfg.feature_kind = *kind;
  cfg.min_count = a.min_count;
  cfg.split = {a.train_fraction, a.seed};
  cfg.linear.seed = a.seed;
  cfg.forest.seed = a.seed;
  const auto result = textclf::train_text_pipeline(loaded.records, cfg);
  std::cout << "train=" << result.train_size << " validation=" << result.validation_size << "\n";
  for (const auto& [name, acc] : result.bundle.selection.per_model_accuracy) {
    std::cout << name << '\t' << acc << (name == result.bundle.selection.chosen ? "\t*" : "") << "\n";
  }
  textclf::save_bundle(result.bundle, a.out);
  std::cout << "wrote " << a.out << " (" << result.bundle.version << ")\n";
  return kOk;
}

int run_train_face(const FaceArgs& a) {
  const auto loaded = corpus::load_fer_csv(a.csv);
  std::cerr << "load report: " << loaded.report.to_json() << "\n";
  std::vector<corpus::LabeledImage> records = loaded.records;
  if (a.limit > 0) {
    records = corpus::stratified_subset<corpus::LabeledImage>(records, a.limit, a.seed);
  }
  auto [train_part, val_part] =
      corpus::split_dataset<corpus::LabeledImage>(records, {a.train_fraction, a.seed});
  cnn::MiniXceptionSpec spec;
  spec.width_multiplier = a.width;
  cnn::Network net = cnn::mini_xception(spec);
  net.init(a.seed);
  cnn::TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.augment = !a.no_augment;
  const auto history = cnn::train(net, cnn::FaceDataset::from_records(train_part),
                                  cnn::FaceDataset::from_records(val_part), cfg);
  history.write_csv(std::cout);
  if (!a.history.empty()) {
    std::ofstream h(a.history);
    history.write_csv(h);
  }
  if (history.diverged) {
    std::cerr << "training diverged: " << *history.diverged << "\n";
    return kInternal;
  }
  cnn::save_weights(net, a.out);
  std::cout << "wrote " << a.out << "\n";
  return kOk;
}

struct LoadedModels {
  textclf::TextBundle bundle;
  cnn::Network network;
  vision::Cascade cascade;

  verifier::ModelSet set() const { return {&bundle, &network, &cascade, {}}; }
};

LoadedModels load_models(const ModelArgs& m) {
  return {textclf::load_bundle(m.bundle), cnn::load_weights(m.weights), vision::load_cascade(m.cascade)};
}

vision::GrayImage load_image(const std::string& path, const std::string& raw_size) {
  if (raw_size.empty()) return vision::read_pgm(path);
  int w = 0, h = 0;
  char x = 0;
  std::istringstream in(raw_size);
  if (!(in >> w >> x >> h) || x != 'x') throw InvalidArgument("--raw expects WxH");
  return vision::read_raw_gray(path, w, h);
}

int run_verify(const ModelArgs& m, const VerifyArgs& a) {
  const LoadedModels models = load_models(m);
  std::optional<vision::GrayImage> image;
  if (!a.image.empty()) image = load_image(a.image, a.raw_size);
  const auto r = verifier::verify_message(a.text, image ? &*image : nullptr, models.set());
  std::cout << (a.record ? r.to_record() : r.to_json().dump(2)) << "\n";
  return kOk;
}

/// Fixture manifest: `truth<TAB>image<TAB>text` per line, '#' comments,
/// image paths relative to the manifest, `-` for no image.
int run_evaluate(const ModelArgs& m, const EvalArgs& a) {
  const LoadedModels models = load_models(m);
  std::ifstream in(a.fixtures);
  if (!in) throw DataError("cannot open " + a.fixtures);
  const auto base = std::filesystem::path(a.fixtures).parent_path();
  std::vector<verifier::EvalCase> cases;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw DataError(a.fixtures + ":" + std::to_string(n) + ": expected truth<TAB>image<TAB>text");
    const auto truth = verifier::parse_verdict(line.substr(0, t1));
    if (!truth) throw DataError(a.fixtures + ":" + std::to_string(n) + ": truth must be Honest or Liar");
    const std::string img = line.substr(t1 + 1, t2 - t1 - 1);
    std::optional<vision::GrayImage> image;
    if (img != "-") image = vision::read_pgm(base / img);
    const auto r = verifier::verify_message(line.substr(t2 + 1), image ? &*image : nullptr, models.set());
    std::cout << r.to_record() << " truth=" << verifier::to_string(*truth) << "\n";
    cases.push_back({r.verdict, *truth});
  }
  std::cout << verifier::evaluate(cases).to_json().dump(2) << "\n";
  return kOk;
}

service::HttpServer* g_server = nullptr;

int run_serve(const std::string& config_path) {
  service::Service svc(service::load_config(config_path));
  service::HttpServer server(svc);
  const int port = server.bind();
  spdlog::info("loading models");
  svc.load_models();
  spdlog::info("listening on {}:{}", svc.config().bind_address, port);
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  server.listen();
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie-Sensor: flags messages whose text emotion contradicts the sender's face"};
  app.require_subcommand(1);

  TextArgs text;
  auto* tt = app.add_subcommand("train-text", "Train the text emotion classifier bundle");
  tt->add_option("tweets", text.csv, "Tweet CSV (tweet_id,sentiment,author,content)")->required();
  tt->add_option("--out", text.out, "Output bundle path")->required();
  tt->add_option("--features", text.features, "count or tfidf")->capture_default_str();
  tt->add_option("--min-count", text.min_count, "Vocabulary minimum frequency")->capture_default_str();
  tt->add_option("--labels", text.labels, "Label-map override file");
  tt->add_option("--train-fraction", text.train_fraction)->capture_default_str();
  tt->add_option("--seed", text.seed)->capture_default_str();

  FaceArgs face;
  auto* tf = app.add_subcommand("train-face", "Train the face emotion CNN");
  tf->add_option("fer", face.csv, "FER-format CSV (emotion,pixels[,Usage])")->required();
  tf->add_option("--out", face.out, "Output weight file")->required();
  tf->add_option("--epochs", face.epochs)->capture_default_str();
  tf->add_option("--batch", face.batch)->capture_default_str();
  tf->add_option("--lr", face.lr)->capture_default_str();
  tf->add_option("--width", face.width, "Width multiplier")->capture_default_str();
  tf->add_option("--limit", face.limit, "Stratified subset size (0 = all)")->capture_default_str();
  tf->add_option("--train-fraction", face.train_fraction)->capture_default_str();
  tf->add_option("--seed", face.seed)->capture_default_str();
  tf->add_option("--history", face.history, "Write epoch,loss,val_accuracy CSV here");
  tf->add_flag("--no-augment", face.no_augment);

  ModelArgs models;
  const auto add_model_opts = [&](CLI::App* sub) {
    sub->add_option("--bundle", models.bundle, "Text bundle")->required();
    sub->add_option("--weights", models.weights, "CNN weight file")->required();
    sub->add_option("--cascade", models.cascade, "Face cascade XML")->capture_default_str();
  };

  VerifyArgs verify;
  auto* vf = app.add_subcommand("verify", "Verify one message");
  add_model_opts(vf);
  vf->add_option("--text", verify.text, "Message text")->required();
  vf->add_option("--image", verify.image, "PGM (P5) image, or raw gray with --raw");
  vf->add_option("--raw", verify.raw_size, "Treat --image as raw 8-bit gray of size WxH");
  vf->add_flag("--record", verify.record, "Print a field=value record instead of JSON");

  EvalArgs eval;
  auto* ev = app.add_subcommand("evaluate", "Precision/recall over a fixture manifest");
  add_model_opts(ev);
  ev->add_option("--fixtures", eval.fixtures, "Manifest of truth<TAB>image<TAB>text lines")->required();

  std::string config_path;
  auto* sv = app.add_subcommand("serve", "Run the HTTP service");
  sv->add_option("--config", config_path, "key=value config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (tt->parsed()) return run_train_text(text);
    if (tf->parsed()) return run_train_face(face);
    if (vf->parsed()) return run_verify(models, verify);
    if (ev->parsed()) return run_evaluate(models, eval);
    if (sv->parsed()) return run_serve(config_path);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
