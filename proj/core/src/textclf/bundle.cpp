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

#include "liesensor/textclf/bundle.hpp"

#include <cmath>
#include <map>

#include "liesensor/binary_io.hpp"
#include "liesensor/error.hpp"
#include "liesensor/textprep/textprep.hpp"

namespace liesensor::textclf {

namespace {

constexpr std::string_view kMagic = "LSTXTBND";

enum class ModelTag : std::uint8_t { NaiveBayes = 0, Linear = 1, Forest = 2 };

void write_scores(binary::Writer& w, const EmotionScores& s) {
  for (double v : s) w.f64(v);
}
EmotionScores read_scores(binary::Reader& r) {
  EmotionScores s{};
  for (double& v : s) v = r.f64();
  return s;
}

void write_rows(binary::Writer& w, const std::array<std::vector<double>, kEmotionCount>& rows) {
  for (const auto& row : rows) {
    for (double v : row) w.f64(v);
  }
}
std::array<std::vector<double>, kEmotionCount> read_rows(binary::Reader& r, std::uint64_t dim) {
  if (dim * kEmotionCount * sizeof(double) > r.remaining()) {
    throw DataError("bundle: model rows exceed section size");
  }
  std::array<std::vector<double>, kEmotionCount> rows;
  for (auto& row : rows) {
    row.resize(static_cast<std::size_t>(dim));
    for (double& v : row) v = r.f64();
  }
  return rows;
}

std::string encode_model(const TextModel& model) {
  binary::Writer w;
  if (const auto* nb = std::get_if<NaiveBayesModel>(&model)) {
    w.u8(static_cast<std::uint8_t>(ModelTag::NaiveBayes));
    w.f64(nb->alpha);
    w.u64(nb->dimension());
    write_scores(w, nb->class_log_prior);
    write_rows(w, nb->log_likelihood);
  } else if (const auto* lin = std::get_if<LinearModel>(&model)) {
    w.u8(static_cast<std::uint8_t>(ModelTag::Linear));
    w.u8(static_cast<std::uint8_t>(lin->kind));
    w.f64(lin->hyper.learning_rate);
    w.f64(lin->hyper.decay);
    w.u32(lin->hyper.epochs);
    w.f64(lin->hyper.l2_lambda);
    w.u32(lin->hyper.batch_size);
    w.u64(lin->hyper.seed);
    w.u64(lin->dimension());
    write_rows(w, lin->weights);
    write_scores(w, lin->bias);
  } else {
    const auto& rf = std::get<RandomForestModel>(model);
    w.u8(static_cast<std::uint8_t>(ModelTag::Forest));
    w.u64(rf.dimension);
    w.u32(rf.hyper.n_trees);
    w.u32(rf.hyper.max_depth);
    w.u32(rf.hyper.min_leaf);
    w.u32(rf.hyper.feature_subsample);
    w.u8(rf.hyper.bootstrap ? 1 : 0);
    w.u64(rf.hyper.seed);
    w.u32(static_cast<std::uint32_t>(rf.trees.size()));
    for (const auto& tree : rf.trees) {
      w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
      for (const auto& node : tree.nodes) {
        w.u32(static_cast<std::uint32_t>(node.feature));
        w.f64(node.threshold);
        w.u32(static_cast<std::uint32_t>(node.left));
        w.u32(static_cast<std::uint32_t>(node.right));
        write_scores(w, node.counts);
      }
    }
  }
  return w.take();
}

TextModel decode_model(std::string_view payload) {
  binary::Reader r(payload, "bundle model section");
  const auto tag = r.u8();
  switch (static_cast<ModelTag>(tag)) {
    case ModelTag::NaiveBayes: {
      NaiveBayesModel nb;
      nb.alpha = r.f64();
      const std::uint64_t dim = r.u64();
      nb.class_log_prior = read_scores(r);
      nb.log_likelihood = read_rows(r, dim);
      return nb;
    }
    case ModelTag::Linear: {
      LinearModel lin;
      const auto kind = r.u8();
      if (kind > 1) throw DataError("bundle: unknown linear model kind " + std::to_string(kind));
      lin.kind = static_cast<LinearKind>(kind);
      lin.hyper.learning_rate = r.f64();
      lin.hyper.decay = r.f64();
      lin.hyper.epochs = r.u32();
      lin.hyper.l2_lambda = r.f64();
      lin.hyper.batch_size = r.u32();
      lin.hyper.seed = r.u64();
      const std::uint64_t dim = r.u64();
      lin.weights = read_rows(r, dim);
      lin.bias = read_scores(r);
      return lin;
    }
    case ModelTag::Forest: {
      RandomForestModel rf;
      rf.dimension = static_cast<std::size_t>(r.u64());
      rf.hyper.n_trees = r.u32();
      rf.hyper.max_depth = r.u32();
      rf.hyper.min_leaf = r.u32();
      rf.hyper.feature_subsample = r.u32();
      rf.hyper.bootstrap = r.u8() != 0;
      rf.hyper.seed = r.u64();
      const std::uint32_t n_trees = r.u32();
      if (n_trees == 0) throw DataError("bundle: forest without trees");
      for (std::uint32_t t = 0; t < n_trees; ++t) {
        DecisionTree tree;
        const std::uint32_t n_nodes = r.u32();
        if (n_nodes == 0 || n_nodes > r.remaining()) {
          throw DataError("bundle: tree " + std::to_string(t) + " has bad node count");
        }
        tree.nodes.resize(n_nodes);
        for (std::uint32_t n = 0; n < n_nodes; ++n) {
          TreeNode& node = tree.nodes[n];
          node.feature = static_cast<std::int32_t>(r.u32());
          node.threshold = r.f64();
          node.left = static_cast<std::int32_t>(r.u32());
          node.right = static_cast<std::int32_t>(r.u32());
          node.counts = read_scores(r);
          if (node.is_leaf()) {
            double total = 0.0;
            for (double c : node.counts) total += c;
            if (!(total > 0.0)) {
              throw DataError("bundle: tree " + std::to_string(t) + " leaf " + std::to_string(n) +
                              " has no samples");
            }
            continue;
          }
          // children always follow their parent, which rules out cycles
          const auto valid_child = [&](std::int32_t c) {
            return c > static_cast<std::int32_t>(n) && c < static_cast<std::int32_t>(n_nodes);
          };
          if (static_cast<std::size_t>(node.feature) >= rf.dimension || !valid_child(node.left) ||
              !valid_child(node.right)) {
            throw DataError("bundle: tree " + std::to_string(t) + " node " + std::to_string(n) +
                            " is malformed");
          }
        }
        rf.trees.push_back(std::move(tree));
      }
      return rf;
    }
  }
  throw DataError("bundle: unknown model tag " + std::to_string(tag));
}

std::string encode_selection(const ModelSelection& sel) {
  binary::Writer w;
  w.u32(static_cast<std::uint32_t>(sel.per_model_accuracy.size()));
  for (const auto& [name, acc] : sel.per_model_accuracy) {
    w.str(name);
    w.f64(acc);
  }
  w.str(sel.chosen);
  return w.take();
}

ModelSelection decode_selection(std::string_view payload) {
  binary::Reader r(payload, "bundle selection section");
  ModelSelection sel;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name(r.str());
    sel.per_model_accuracy.emplace_back(std::move(name), r.f64());
  }
  sel.chosen = std::string(r.str());
  return sel;
}

std::string encode_idf(const features::IdfTable& idf) {
  binary::Writer w;
  w.u64(idf.doc_count);
  w.u64(idf.idf.size());
  for (double v : idf.idf) w.f64(v);
  return w.take();
}

features::IdfTable decode_idf(std::string_view payload) {
  binary::Reader r(payload, "bundle idf section");
  features::IdfTable idf;
  idf.doc_count = r.u64();
  const std::uint64_t dim = r.u64();
  if (dim * sizeof(double) > r.remaining()) throw DataError("bundle: idf exceeds section size");
  idf.idf.resize(static_cast<std::size_t>(dim));
  for (double& v : idf.idf) {
    v = r.f64();
    if (!std::isfinite(v) || v < 0.0) throw DataError("bundle: invalid idf value");
  }
  return idf;
}

}  // namespace

std::optional<TextPrediction> TextBundle::predict(std::string_view raw_text) const {
  const auto x = features.transform(textprep::preprocess(raw_text));
  if (x.empty()) return std::nullopt;
  return predict_text(model, x);
}

std::string encode_bundle(const TextBundle& bundle) {
  std::vector<std::pair<std::string_view, std::string>> sections;
  sections.emplace_back("feature_kind", std::string(features::to_string(bundle.features.kind)));
  sections.emplace_back("vocabulary", bundle.features.vocab.serialize());
  if (bundle.features.kind == features::FeatureKind::Tfidf) {
    if (!bundle.features.idf) throw InvalidArgument("bundle: tfidf features without idf table");
    sections.emplace_back("idf", encode_idf(*bundle.features.idf));
  }
  sections.emplace_back("selection", encode_selection(bundle.selection));
  sections.emplace_back("model", encode_model(bundle.model));

  binary::Writer w;
  w.bytes(kMagic);
  w.u32(kBundleFormatVersion);
  w.str(bundle.version);
  w.u32(static_cast<std::uint32_t>(sections.size()));
  for (const auto& [name, payload] : sections) {
    w.str(name);
    w.blob(payload);
  }
  w.u32(binary::crc32(w.data()));
  return w.take();
}

TextBundle decode_bundle(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 8) {
    throw ChecksumError("bundle: checksum failure (file truncated to " +
                        std::to_string(bytes.size()) + " bytes)");
  }
  if (bytes.substr(0, kMagic.size()) != kMagic) throw DataError("bundle: bad magic bytes");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  binary::Reader tail(bytes.substr(bytes.size() - 4), "bundle checksum");
  if (binary::crc32(body) != tail.u32()) {
    throw ChecksumError("bundle: checksum failure (truncated or corrupted file)");
  }

  binary::Reader r(body.substr(kMagic.size()), "bundle");
  const std::uint32_t version = r.u32();
  if (version != kBundleFormatVersion) {
    throw DataError("bundle: unsupported format version " + std::to_string(version));
  }
  TextBundle bundle;
  bundle.version = std::string(r.str());
  const std::uint32_t count = r.u32();
  std::map<std::string, std::string_view, std::less<>> sections;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.str());
    const std::string_view payload = r.blob();
    if (!sections.emplace(std::move(name), payload).second) {
      throw DataError("bundle: duplicate section");
    }
  }
  if (!r.at_end()) throw DataError("bundle: trailing bytes after sections");
  const auto section = [&](std::string_view name) {
    const auto it = sections.find(name);
    if (it == sections.end()) throw DataError("bundle: missing section '" + std::string(name) + "'");
    return it->second;
  };

  const auto kind = features::parse_feature_kind(section("feature_kind"));
  if (!kind) throw DataError("bundle: unknown feature kind");
  bundle.features.kind = *kind;
  bundle.features.vocab = textprep::Vocabulary::deserialize(section("vocabulary"));
  if (*kind == features::FeatureKind::Tfidf) {
    bundle.features.idf = decode_idf(section("idf"));
    if (bundle.features.idf->dimension() != bundle.features.vocab.size()) {
      throw DataError("bundle: idf dimension does not match vocabulary");
    }
  }
  bundle.selection = decode_selection(section("selection"));
  bundle.model = decode_model(section("model"));
  if (model_dimension(bundle.model) != bundle.features.dimension()) {
    throw DataError("bundle: model dimension " + std::to_string(model_dimension(bundle.model)) +
                    " does not match vocabulary size " +
                    std::to_string(bundle.features.dimension()));
  }
  return bundle;
}

void save_bundle(const TextBundle& bundle, const std::filesystem::path& path) {
  binary::write_file(path, encode_bundle(bundle));
}

TextBundle load_bundle(const std::filesystem::path& path) {
  return decode_bundle(binary::read_file(path));
}

// ---------------------------------------------------------------- training

TextTrainingResult train_text_pipeline(std::span<const corpus::LabeledText> train,
                                       std::span<const corpus::LabeledText> validation,
                                       const TextTrainingConfig& config) {
  if (train.empty() || validation.empty()) {
    throw InvalidArgument("text training: empty train or validation split");
  }
  const auto docs_of = [](std::span<const corpus::LabeledText> records) {
    std::vector<textprep::TokenizedDoc> docs;
    docs.reserve(records.size());
    for (const auto& r : records) docs.push_back(textprep::preprocess(r.content));
    return docs;
  };
  const auto labels_of = [](std::span<const corpus::LabeledText> records) {
    std::vector<EmotionLabel> labels;
    labels.reserve(records.size());
    for (const auto& r : records) labels.push_back(r.label);
    return labels;
  };

  const auto train_docs = docs_of(train);
  const auto val_docs = docs_of(validation);
  const auto y_train = labels_of(train);
  const auto y_val = labels_of(validation);

  auto space = features::FeatureSpace::fit(train_docs, config.feature_kind, config.min_count);
  const auto X_train = space.transform_all(train_docs);
  const auto X_val = space.transform_all(val_docs);

  TextTrainingResult result;
  result.train_size = train.size();
  result.validation_size = validation.size();
  result.candidates.emplace_back(train_naive_bayes(X_train, y_train, config.nb_alpha));
  result.candidates.emplace_back(train_linear_svm(X_train, y_train, config.linear));
  result.candidates.emplace_back(train_logistic(X_train, y_train, config.linear));
  result.candidates.emplace_back(train_random_forest(X_train, y_train, config.forest));

  ModelSelection selection = select_best(result.candidates, X_val, y_val);
  const auto chosen = std::find_if(result.candidates.begin(), result.candidates.end(),
                                   [&](const TextModel& m) { return model_name(m) == selection.chosen; });
  result.bundle.version = "text-bundle-v" + std::to_string(kBundleFormatVersion) + ":" +
                          selection.chosen + ":" + std::string(features::to_string(space.kind)) +
                          ":V" + std::to_string(space.dimension());
  result.bundle.model = *chosen;
  result.bundle.features = std::move(space);
  result.bundle.selection = std::move(selection);
  return result;
}

TextTrainingResult train_text_pipeline(std::span<const corpus::LabeledText> records,
                                       const TextTrainingConfig& config) {
  const auto [train, validation] = corpus::split_dataset(records, config.split);
  return train_text_pipeline(train, validation, config);
}

}  // namespace liesensor::textclf
