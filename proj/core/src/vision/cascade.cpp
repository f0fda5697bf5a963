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

#include "liesensor/vision/cascade.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cstdio>
#include <locale>
#include <sstream>
#include <string>

#include "liesensor/binary_io.hpp"
#include "liesensor/error.hpp"

namespace liesensor::vision {

namespace pt = boost::property_tree;

namespace {

bool is_meta(const std::string& key) { return key == "<xmlcomment>" || key == "<xmlattr>"; }

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw DataError("cascade: " + path + ": " + msg);
}

std::vector<double> numbers(const std::string& text, const std::string& path) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) fail(path, "expected numbers, got '" + text + "'");
  return out;
}

const pt::ptree& child(const pt::ptree& node, const std::string& key, const std::string& path) {
  const auto it = node.find(key);
  if (it == node.not_found()) fail(path, "missing <" + key + ">");
  return it->second;
}

double scalar(const pt::ptree& node, const std::string& key, const std::string& path) {
  const auto v = numbers(child(node, key, path).data(), path + "/" + key);
  if (v.size() != 1) fail(path + "/" + key, "expected one number");
  return v[0];
}

int integer(double v, const std::string& path) {
  if (v != static_cast<double>(static_cast<int>(v))) fail(path, "expected an integer");
  return static_cast<int>(v);
}

/// Non-meta children in document order.
std::vector<const pt::ptree*> items(const pt::ptree& node) {
  std::vector<const pt::ptree*> out;
  for (const auto& [key, sub] : node) {
    if (!is_meta(key)) out.push_back(&sub);
  }
  return out;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "/_[" + std::to_string(i) + "]";
}

std::vector<HaarRect> parse_rects(const pt::ptree& feature, const std::string& path) {
  if (const auto t = feature.get_optional<std::string>("tilted")) {
    if (numbers(*t, path + "/tilted") != std::vector<double>{0.0}) {
      fail(path, "tilted features are not supported");
    }
  }
  const std::string rects_path = path + "/rects";
  std::vector<HaarRect> rects;
  const auto list = items(child(feature, "rects", path));
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = indexed(rects_path, i);
    const auto v = numbers(list[i]->data(), p);
    if (v.size() != 5) fail(p, "rect needs 'x y w h weight'");
    rects.push_back({integer(v[0], p), integer(v[1], p), integer(v[2], p), integer(v[3], p), v[4]});
  }
  return rects;
}

Cascade parse_old_style(const pt::ptree& root, const std::string& base) {
  Cascade c;
  const auto size = numbers(child(root, "size", base).data(), base + "/size");
  if (size.size() != 2) fail(base + "/size", "expected 'width height'");
  c.window_w = integer(size[0], base + "/size");
  c.window_h = integer(size[1], base + "/size");

  const std::string stages_path = base + "/stages";
  const auto stages = items(child(root, "stages", base));
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const std::string sp = indexed(stages_path, s);
    CascadeStage stage;
    stage.threshold = scalar(*stages[s], "stage_threshold", sp);
    const auto trees = items(child(*stages[s], "trees", sp));
    for (std::size_t t = 0; t < trees.size(); ++t) {
      const std::string tp = indexed(sp + "/trees", t);
      const auto nodes = items(*trees[t]);
      if (nodes.size() != 1) {
        fail(tp, "tree with " + std::to_string(nodes.size()) + " nodes; only stumps are supported");
      }
      const pt::ptree& node = *nodes[0];
      const std::string np = indexed(tp, 0);
      if (node.find("left_node") != node.not_found() || node.find("right_node") != node.not_found()) {
        fail(np, "non-stump tree (left_node/right_node)");
      }
      WeakClassifier weak;
      weak.rects = parse_rects(child(node, "feature", np), np + "/feature");
      weak.threshold = scalar(node, "threshold", np);
      weak.left_value = scalar(node, "left_val", np);
      weak.right_value = scalar(node, "right_val", np);
      stage.weak.push_back(std::move(weak));
    }
    c.stages.push_back(std::move(stage));
  }
  return c;
}

Cascade parse_new_style(const pt::ptree& root, const std::string& base) {
  if (const auto t = root.get_optional<std::string>("stageType")) {
    if (*t != "BOOST") fail(base + "/stageType", "unsupported '" + *t + "'");
  }
  if (const auto t = root.get_optional<std::string>("featureType")) {
    if (*t != "HAAR") fail(base + "/featureType", "unsupported '" + *t + "'");
  }
  Cascade c;
  c.window_w = integer(scalar(root, "width", base), base + "/width");
  c.window_h = integer(scalar(root, "height", base), base + "/height");

  std::vector<std::vector<HaarRect>> features;
  const auto feats = items(child(root, "features", base));
  for (std::size_t f = 0; f < feats.size(); ++f) {
    features.push_back(parse_rects(*feats[f], indexed(base + "/features", f)));
  }

  const auto stages = items(child(root, "stages", base));
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const std::string sp = indexed(base + "/stages", s);
    CascadeStage stage;
    stage.threshold = scalar(*stages[s], "stageThreshold", sp);
    const auto weaks = items(child(*stages[s], "weakClassifiers", sp));
    for (std::size_t w = 0; w < weaks.size(); ++w) {
      const std::string wp = indexed(sp + "/weakClassifiers", w);
      const auto nodes = numbers(child(*weaks[w], "internalNodes", wp).data(), wp + "/internalNodes");
      const auto leaves = numbers(child(*weaks[w], "leafValues", wp).data(), wp + "/leafValues");
      if (nodes.size() != 4 || leaves.size() != 2 || nodes[0] != 0 || nodes[1] != -1) {
        fail(wp, "only single-split stumps are supported (" + std::to_string(nodes.size() / 4) +
                     " internal nodes)");
      }
      const int fi = integer(nodes[2], wp + "/internalNodes");
      if (fi < 0 || static_cast<std::size_t>(fi) >= features.size()) {
        fail(wp, "feature index " + std::to_string(fi) + " out of range");
      }
      stage.weak.push_back({features[static_cast<std::size_t>(fi)], nodes[3], leaves[0], leaves[1]});
    }
    c.stages.push_back(std::move(stage));
  }
  return c;
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::size_t Cascade::weak_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.weak.size();
  return n;
}

void Cascade::validate() const {
  if (window_w <= 0 || window_h <= 0) throw DataError("cascade: window size must be positive");
  if (stages.empty()) throw DataError("cascade: no stages");
  for (std::size_t s = 0; s < stages.size(); ++s) {
    if (stages[s].weak.empty()) {
      throw DataError("cascade: stage " + std::to_string(s) + " has no weak classifiers");
    }
    for (std::size_t w = 0; w < stages[s].weak.size(); ++w) {
      const auto& rects = stages[s].weak[w].rects;
      const std::string where = "stage " + std::to_string(s) + ", weak " + std::to_string(w);
      if (rects.empty() || rects.size() > 3) {
        throw DataError("cascade: " + where + ": " + std::to_string(rects.size()) +
                        " rects (need 1..3)");
      }
      for (const auto& r : rects) {
        if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.x + r.w > window_w ||
            r.y + r.h > window_h) {
          throw DataError("cascade: " + where + ": rect " + std::to_string(r.x) + " " +
                          std::to_string(r.y) + " " + std::to_string(r.w) + " " +
                          std::to_string(r.h) + " extends past " + std::to_string(window_w) + "x" +
                          std::to_string(window_h) + " window");
        }
      }
    }
  }
}

Cascade parse_cascade(std::string_view xml) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw DataError(std::string("cascade: malformed XML: ") + e.what());
  }
  const auto storage = tree.find("opencv_storage");
  if (storage == tree.not_found()) throw DataError("cascade: missing <opencv_storage> root");
  for (const auto& [key, node] : storage->second) {
    if (is_meta(key)) continue;
    const std::string base = "opencv_storage/" + key;
    Cascade c;
    if (node.find("size") != node.not_found()) {
      c = parse_old_style(node, base);
    } else if (node.find("width") != node.not_found()) {
      c = parse_new_style(node, base);
    } else {
      continue;
    }
    c.validate();
    return c;
  }
  throw DataError("cascade: no classifier element under <opencv_storage>");
}

Cascade load_cascade(const std::filesystem::path& path) {
  try {
    return parse_cascade(binary::read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string serialize_cascade(const Cascade& cascade, std::string_view name) {
  cascade.validate();
  std::string o;
  o += "<?xml version=\"1.0\"?>\n<opencv_storage>\n";
  o += "<" + std::string(name) + " type_id=\"opencv-haar-classifier\">\n";
  o += "  <size>" + std::to_string(cascade.window_w) + " " + std::to_string(cascade.window_h) +
       "</size>\n  <stages>\n";
  for (const auto& stage : cascade.stages) {
    o += "    <_>\n      <trees>\n";
    for (const auto& weak : stage.weak) {
      o += "        <_>\n          <_>\n            <feature>\n              <rects>\n";
      for (const auto& r : weak.rects) {
        o += "                <_>" + std::to_string(r.x) + " " + std::to_string(r.y) + " " +
             std::to_string(r.w) + " " + std::to_string(r.h) + " " + real(r.weight) + "</_>\n";
      }
      o += "              </rects>\n              <tilted>0</tilted>\n            </feature>\n";
      o += "            <threshold>" + real(weak.threshold) + "</threshold>\n";
      o += "            <left_val>" + real(weak.left_value) + "</left_val>\n";
      o += "            <right_val>" + real(weak.right_value) + "</right_val>\n";
      o += "          </_>\n        </_>\n";
    }
    o += "      </trees>\n      <stage_threshold>" + real(stage.threshold) +
         "</stage_threshold>\n      <parent>-1</parent>\n      <next>-1</next>\n    </_>\n";
  }
  o += "  </stages>\n</" + std::string(name) + ">\n</opencv_storage>\n";
  return o;
}

void save_cascade(const Cascade& cascade, const std::filesystem::path& path) {
  binary::write_file(path, serialize_cascade(cascade));
}

}  // namespace liesensor::vision
