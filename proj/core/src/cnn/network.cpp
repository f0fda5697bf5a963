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

#include "liesensor/cnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "liesensor/binary_io.hpp"
#include "liesensor/error.hpp"

namespace liesensor::cnn {

namespace {

constexpr std::string_view kMagic = "LSCNNWTS";
constexpr std::string_view kDescriptorHeader = "liesensor-cnn 1";

bool all_finite(const Tensor& t) {
  return std::all_of(t.data.begin(), t.data.end(), [](double v) { return std::isfinite(v); });
}

std::string layer_of(const std::string& param_name) {
  const auto dot = param_name.rfind('.');
  return dot == std::string::npos ? param_name : param_name.substr(0, dot);
}

std::string shape_text(const std::vector<std::size_t>& s) { return Tensor(s).shape_string(); }

// ------------------------------------------------------------ descriptor parsing

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

class DescriptorParser {
 public:
  explicit DescriptorParser(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t n = 0;
    while (std::getline(in, raw)) {
      ++n;
      std::istringstream ls(raw);
      Line line{n, {}};
      for (std::string tok; ls >> tok;) line.tokens.push_back(tok);
      if (!line.tokens.empty()) lines_.push_back(std::move(line));
    }
  }

  Network parse() {
    if (lines_.empty() || join(lines_[0]) != kDescriptorHeader) {
      throw DataError("descriptor: expected header '" + std::string(kDescriptorHeader) + "'");
    }
    pos_ = 1;
    const Line& in = expect("input");
    if (in.tokens.size() != 4) fail(in, "expected 'input H W C'");
    const Shape3 shape{count(in, 1), count(in, 2), count(in, 3)};
    auto layers = block({});
    if (pos_ != lines_.size()) fail(lines_[pos_], "unexpected '" + lines_[pos_].tokens[0] + "'");
    return Network(shape, std::move(layers));
  }

 private:
  static std::string join(const Line& l) {
    std::string out;
    for (const auto& t : l.tokens) out += (out.empty() ? "" : " ") + t;
    return out;
  }

  [[noreturn]] static void fail(const Line& l, const std::string& msg) {
    throw DataError("descriptor line " + std::to_string(l.number) + ": " + msg);
  }

  const Line& expect(std::string_view kw) {
    if (pos_ >= lines_.size() || lines_[pos_].tokens[0] != kw) {
      throw DataError("descriptor: expected '" + std::string(kw) + "'");
    }
    return lines_[pos_++];
  }

  static std::size_t count(const Line& l, std::size_t i) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(l.tokens.at(i), &used);
      if (used != l.tokens[i].size() || v == 0) throw std::invalid_argument("");
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      fail(l, "expected a positive integer at field " + std::to_string(i));
    }
  }

  static double number(const Line& l, std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(l.tokens.at(i), &used);
      if (used != l.tokens[i].size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(l, "expected a number at field " + std::to_string(i));
    }
  }

  static void arity(const Line& l, std::size_t n) {
    if (l.tokens.size() != n) {
      fail(l, "'" + l.tokens[0] + "' takes " + std::to_string(n - 1) + " fields");
    }
  }

  /// Parses layers until one of `stops` (left unconsumed) or end of input.
  std::vector<LayerPtr> block(std::vector<std::string_view> stops) {
    std::vector<LayerPtr> out;
    while (pos_ < lines_.size()) {
      const Line& l = lines_[pos_];
      const std::string& kw = l.tokens[0];
      if (std::find(stops.begin(), stops.end(), kw) != stops.end()) break;
      ++pos_;
      try {
        out.push_back(layer(l));
      } catch (const InvalidArgument& e) {
        fail(l, e.what());
      }
    }
    return out;
  }

  LayerPtr layer(const Line& l) {
    const std::string& kw = l.tokens[0];
    if (l.tokens.size() < 2) fail(l, "missing layer name");
    const std::string& name = l.tokens[1];
    if (kw == "conv") {
      arity(l, 9);
      Padding pad;
      if (l.tokens[6] == "same") {
        pad = Padding::Same;
      } else if (l.tokens[6] == "valid") {
        pad = Padding::Valid;
      } else {
        fail(l, "padding must be same or valid");
      }
      if (l.tokens[7] != "0" && l.tokens[7] != "1") fail(l, "bias flag must be 0 or 1");
      return std::make_unique<Conv2D>(name, count(l, 2), count(l, 3), count(l, 4), count(l, 5), pad,
                                      l.tokens[7] == "1", number(l, 8));
    }
    if (kw == "sepconv") {
      arity(l, 6);
      return std::make_unique<SepConv2D>(name, count(l, 2), count(l, 3), count(l, 4), number(l, 5));
    }
    if (kw == "bn") {
      arity(l, 5);
      return std::make_unique<BatchNorm>(name, count(l, 2), number(l, 3), number(l, 4));
    }
    if (kw == "relu") {
      arity(l, 2);
      return std::make_unique<ReLU>(name);
    }
    if (kw == "maxpool") {
      arity(l, 4);
      return std::make_unique<MaxPool>(name, count(l, 2), count(l, 3));
    }
    if (kw == "gap") {
      arity(l, 2);
      return std::make_unique<GlobalAvgPool>(name);
    }
    if (kw == "residual") {
      arity(l, 2);
      expect("shortcut");
      auto shortcut = block({"main"});
      expect("main");
      auto main = block({"end"});
      expect("end");
      return std::make_unique<Residual>(name, std::move(main), std::move(shortcut));
    }
    fail(l, "unknown layer kind '" + kw + "'");
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

std::size_t scaled(double filters, double mult) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(filters * mult)));
}

}  // namespace

// ------------------------------------------------------------ Network

Network::Network(Shape3 input, std::vector<LayerPtr> layers)
    : input_(input), layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidArgument("network: no layers");
  const Shape3 out = chain_shape(layers_, input_, "network");
  if (out[0] != 1 || out[1] != 1) {
    throw ShapeError("network: output must be (N, classes); last layer yields " +
                     std::to_string(out[0]) + "x" + std::to_string(out[1]) + "x" +
                     std::to_string(out[2]) + " (end with global average pooling)");
  }
  classes_ = out[2];
}

Tensor Network::infer(const Tensor& x) const {
  if (x.rank() != 4 || x.dim(1) != input_[0] || x.dim(2) != input_[1] || x.dim(3) != input_[2]) {
    throw ShapeError("network: expected input (N," + std::to_string(input_[0]) + "," +
                     std::to_string(input_[1]) + "," + std::to_string(input_[2]) + "), got " +
                     x.shape_string());
  }
  Tensor h = x;
  for (const auto& l : layers_) h = l->infer(h);
  return h;
}

Tensor Network::forward(const Tensor& x) {
  if (mode_ == Mode::Eval) return infer(x);
  if (x.rank() != 4 || x.dim(0) == 0 || x.dim(1) != input_[0] || x.dim(2) != input_[1] ||
      x.dim(3) != input_[2]) {
    throw ShapeError("network: bad training batch shape " + x.shape_string());
  }
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

void Network::backward(const Tensor& grad_logits) {
  Tensor g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(g);
    for (const Param* p : layers_[i]->params()) {
      if (p->trainable && !all_finite(p->grad)) {
        throw DivergenceError("non-finite gradient in layer " + std::to_string(i) + " ('" +
                              layers_[i]->name() + "', parameter " + p->name + ")");
      }
    }
    if (!all_finite(g)) {
      throw DivergenceError("non-finite input gradient at layer " + std::to_string(i) + " ('" +
                            layers_[i]->name() + "')");
    }
  }
}

std::vector<Param*> Network::params() {
  std::vector<Param*> out;
  for (auto& l : layers_) {
    for (Param* p : l->params()) out.push_back(p);
  }
  return out;
}

std::vector<const Param*> Network::params() const {
  auto ps = const_cast<Network*>(this)->params();
  return {ps.begin(), ps.end()};
}

void Network::zero_grad() {
  for (Param* p : params()) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
}

double Network::l2_penalty() const {
  double acc = 0.0;
  for (const Param* p : params()) {
    if (p->l2 == 0.0) continue;
    double ss = 0.0;
    for (double v : p->value.data) ss += v * v;
    acc += p->l2 * ss;
  }
  return acc;
}

void Network::add_l2_grad() {
  for (Param* p : params()) {
    if (p->l2 == 0.0 || !p->trainable) continue;
    for (std::size_t i = 0; i < p->value.size(); ++i) p->grad.data[i] += 2.0 * p->l2 * p->value.data[i];
  }
}

std::size_t Network::parameter_count(bool trainable_only) const {
  std::size_t n = 0;
  for (const Param* p : params()) {
    if (!trainable_only || p->trainable) n += p->value.size();
  }
  return n;
}

void Network::init(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 0x1417);
  for (auto& l : layers_) l->init(rng);
}

std::string Network::descriptor() const {
  std::ostringstream os;
  os << kDescriptorHeader << '\n'
     << "input " << input_[0] << ' ' << input_[1] << ' ' << input_[2] << '\n';
  for (const auto& l : layers_) l->describe(os, 0);
  return os.str();
}

Network Network::clone() const {
  Network copy = parse_descriptor(descriptor());
  auto dst = copy.params();
  const auto src = params();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->value = src[i]->value;
  copy.mode_ = mode_;
  return copy;
}

Network parse_descriptor(std::string_view text) { return DescriptorParser(text).parse(); }

Network mini_xception(const MiniXceptionSpec& spec) {
  if (spec.width_multiplier <= 0) throw InvalidArgument("mini_xception: width multiplier must be > 0");
  const double m = spec.width_multiplier;
  std::vector<LayerPtr> layers;
  const std::size_t entry = scaled(8, m);
  layers.push_back(std::make_unique<Conv2D>("entry_conv1", 3, 1, entry, 1, Padding::Valid, false, spec.l2));
  layers.push_back(std::make_unique<BatchNorm>("entry_bn1", entry));
  layers.push_back(std::make_unique<ReLU>("entry_relu1"));
  layers.push_back(std::make_unique<Conv2D>("entry_conv2", 3, entry, entry, 1, Padding::Valid, false, spec.l2));
  layers.push_back(std::make_unique<BatchNorm>("entry_bn2", entry));
  layers.push_back(std::make_unique<ReLU>("entry_relu2"));

  std::size_t channels = entry;
  double filters = 16;
  for (std::size_t i = 1; i <= spec.modules; ++i, filters *= 2) {
    const std::size_t f = scaled(filters, m);
    const std::string p = "module" + std::to_string(i);
    std::vector<LayerPtr> shortcut;
    shortcut.push_back(std::make_unique<Conv2D>(p + "_short_conv", 1, channels, f, 2, Padding::Same, false, spec.l2));
    shortcut.push_back(std::make_unique<BatchNorm>(p + "_short_bn", f));
    std::vector<LayerPtr> main;
    main.push_back(std::make_unique<SepConv2D>(p + "_sep1", 3, channels, f, spec.l2));
    main.push_back(std::make_unique<BatchNorm>(p + "_bn1", f));
    main.push_back(std::make_unique<ReLU>(p + "_relu1"));
    main.push_back(std::make_unique<SepConv2D>(p + "_sep2", 3, f, f, spec.l2));
    main.push_back(std::make_unique<BatchNorm>(p + "_bn2", f));
    main.push_back(std::make_unique<MaxPool>(p + "_pool", 3, 2));
    layers.push_back(std::make_unique<Residual>(p, std::move(main), std::move(shortcut)));
    channels = f;
  }
  layers.push_back(std::make_unique<Conv2D>("head_conv", 3, channels, spec.classes, 1, Padding::Same, true, spec.l2));
  layers.push_back(std::make_unique<GlobalAvgPool>("head_gap"));
  return Network({spec.height, spec.width, 1}, std::move(layers));
}

SoftmaxLoss softmax_cross_entropy(const Tensor& logits, const std::vector<EmotionLabel>& labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size() || labels.empty()) {
    throw ShapeError("softmax_cross_entropy: logits " + logits.shape_string() + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  SoftmaxLoss out;
  out.probabilities = Tensor(logits.shape);
  out.grad_logits = Tensor(logits.shape);
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const double* z = &logits.data[b * c];
    const double top = *std::max_element(z, z + c);
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) sum += std::exp(z[k] - top);
    const double log_sum = std::log(sum);
    const std::size_t y = index_of(labels[b]);
    if (y >= c) throw ShapeError("softmax_cross_entropy: label index outside class range");
    total -= z[y] - top - log_sum;
    for (std::size_t k = 0; k < c; ++k) {
      const double p = std::exp(z[k] - top - log_sum);
      out.probabilities.data[b * c + k] = p;
      out.grad_logits.data[b * c + k] = (p - (k == y ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

// ------------------------------------------------------------ weight file

std::string encode_weights(const Network& net) {
  binary::Writer w;
  w.bytes(kMagic);
  w.u32(kWeightFormatVersion);
  w.str(net.descriptor());
  const auto ps = net.params();
  w.u32(static_cast<std::uint32_t>(ps.size()));
  for (const Param* p : ps) {
    w.str(p->name);
    w.u32(static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape) w.u32(static_cast<std::uint32_t>(d));
    for (double v : p->value.data) w.f32(static_cast<float>(v));
  }
  std::string out = w.take();
  binary::Writer crc;
  crc.u32(binary::crc32(out));
  out += crc.data();
  return out;
}

namespace {

struct Block {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

struct WeightFile {
  std::string descriptor;
  std::vector<std::pair<std::string, Block>> blocks;
};

WeightFile parse_weight_file(std::string_view bytes) {
  constexpr std::size_t kMinSize = 8 + 4 + 4 + 4 + 4;
  if (bytes.size() < kMinSize) throw ChecksumError("weights: file truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  binary::Reader trailer(bytes.substr(bytes.size() - 4), "weights");
  if (trailer.u32() != binary::crc32(body)) {
    throw ChecksumError("weights: checksum mismatch (truncated or corrupted file)");
  }
  binary::Reader r(body, "weights");
  if (r.bytes(kMagic.size()) != kMagic) throw DataError("weights: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kWeightFormatVersion) {
    throw DataError("weights: unsupported format version " + std::to_string(version) +
                    " (expected " + std::to_string(kWeightFormatVersion) + ")");
  }
  WeightFile f;
  f.descriptor = std::string(r.str());
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name(r.str());
    Block b;
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 4) throw DataError("weights: block '" + name + "' has rank " + std::to_string(rank));
    for (std::uint32_t d = 0; d < rank; ++d) b.shape.push_back(r.u32());
    const std::size_t count = Tensor::element_count(b.shape);
    if (count * 4 > r.remaining()) throw DataError("weights: block '" + name + "' overruns file");
    b.values.resize(count);
    for (double& v : b.values) v = r.f32();
    f.blocks.emplace_back(std::move(name), std::move(b));
  }
  if (!r.at_end()) throw DataError("weights: trailing bytes after last block");
  return f;
}

void assign_blocks(Network& net, const WeightFile& f) {
  std::map<std::string, const Block*> by_name;
  for (const auto& [name, b] : f.blocks) {
    if (!by_name.emplace(name, &b).second) throw DataError("weights: duplicate block '" + name + "'");
  }
  const auto ps = net.params();
  for (Param* p : ps) {
    const auto it = by_name.find(p->name);
    if (it == by_name.end()) {
      throw DataError("weights: layer '" + layer_of(p->name) + "' has no block '" + p->name + "'");
    }
    if (it->second->shape != p->value.shape) {
      throw ShapeError("weights: shape mismatch in layer '" + layer_of(p->name) + "' (" + p->name +
                       "): file " + shape_text(it->second->shape) + ", network " +
                       p->value.shape_string());
    }
  }
  if (by_name.size() != ps.size()) {
    for (const auto& [name, b] : f.blocks) {
      if (std::none_of(ps.begin(), ps.end(), [&](const Param* p) { return p->name == name; })) {
        throw DataError("weights: block '" + name + "' matches no layer parameter");
      }
    }
  }
  for (Param* p : ps) p->value.data = by_name.at(p->name)->values;
}

}  // namespace

Network decode_weights(std::string_view bytes) {
  const WeightFile f = parse_weight_file(bytes);
  Network net = parse_descriptor(f.descriptor);
  assign_blocks(net, f);
  return net;
}

void decode_weights_into(Network& net, std::string_view bytes) {
  assign_blocks(net, parse_weight_file(bytes));
}

void save_weights(const Network& net, const std::filesystem::path& path) {
  binary::write_file(path, encode_weights(net));
}

Network load_weights(const std::filesystem::path& path) {
  return decode_weights(binary::read_file(path));
}

void load_weights_into(Network& net, const std::filesystem::path& path) {
  decode_weights_into(net, binary::read_file(path));
}

}  // namespace liesensor::cnn
