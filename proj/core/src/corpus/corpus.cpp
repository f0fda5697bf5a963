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

#include "liesensor/corpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>
#include "liesensor/corpus/csv.hpp"
#include "liesensor/error.hpp"
#include "liesensor/random.hpp"

namespace liesensor::corpus {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

bool is_blank(const csv::Record& r) {
  return r.fields.size() == 1 && trim(r.fields[0]).empty();
}

std::vector<std::string> normalized_header(const csv::Record& r) {
  std::vector<std::string> names;
  names.reserve(r.fields.size());
  for (const auto& f : r.fields) {
    std::string_view name = trim(f);
    // tolerate a UTF-8 byte order mark on the first column
    if (name.starts_with("\xEF\xBB\xBF")) name.remove_prefix(3);
    names.push_back(lower(name));
  }
  return names;
}

std::size_t column_or_throw(const std::vector<std::string>& header, std::string_view name,
                            std::string_view file_kind) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError(std::string(file_kind) + " csv: missing required column '" +
                    std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::size_t LoadReport::dropped() const {
  std::size_t n = 0;
  for (const auto& [label, count] : dropped_by_label) n += count;
  return n;
}

std::string LoadReport::to_json() const {
  nlohmann::ordered_json j;
  j["total_rows"] = total_rows;
  j["kept"] = kept;
  j["dropped_by_label"] = nlohmann::ordered_json::object();
  for (const auto& [label, count] : dropped_by_label) j["dropped_by_label"][label] = count;
  j["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : errors) j["errors"].push_back({{"row", e.row}, {"reason", e.reason}});
  return j.dump();
}

std::optional<EmotionLabel> map_fer_label(int code) {
  switch (code) {
    case 0: return EmotionLabel::Hate;       // Angry
    case 1: return std::nullopt;             // Disgust
    case 2: return std::nullopt;             // Fear
    case 3: return EmotionLabel::Happiness;  // Happy
    case 4: return EmotionLabel::Sadness;    // Sad
    case 5: return EmotionLabel::Surprise;   // Surprise
    case 6: return std::nullopt;             // Neutral
    default:
      throw InvalidArgument("FER emotion code " + std::to_string(code) + " outside 0..6");
  }
}

std::string_view fer_code_name(int code) {
  static constexpr std::array<std::string_view, 7> kNames = {
      "angry", "disgust", "fear", "happy", "sad", "surprise", "neutral"};
  if (code < 0 || code > 6) return "invalid";
  return kNames[static_cast<std::size_t>(code)];
}

// ---------------------------------------------------------------- LabelMap

LabelMap LabelMap::defaults() {
  LabelMap m;
  for (const char* name : {"happiness", "fun", "enthusiasm", "love", "relief"}) {
    m.set(name, EmotionLabel::Happiness);
  }
  m.set("sadness", EmotionLabel::Sadness);
  m.set("worry", EmotionLabel::Sadness);
  m.set("surprise", EmotionLabel::Surprise);
  m.set("hate", EmotionLabel::Hate);
  m.set("anger", EmotionLabel::Hate);
  for (const char* name : {"neutral", "empty", "boredom"}) m.set(name, std::nullopt);
  return m;
}

void LabelMap::set(std::string raw, std::optional<EmotionLabel> target) {
  table_.insert_or_assign(lower(raw), target);
}

std::optional<EmotionLabel> LabelMap::map(std::string_view raw) const {
  const auto it = table_.find(raw);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

LabelMap LabelMap::with_overrides(const LabelMap& base, std::istream& in) {
  LabelMap m = base;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw DataError("label map line " + std::to_string(line_no) + ": expected 'name = Label'");
    }
    const std::string_view raw = trim(body.substr(0, eq));
    const std::string_view target = trim(body.substr(eq + 1));
    if (raw.empty()) {
      throw DataError("label map line " + std::to_string(line_no) + ": empty sentiment name");
    }
    if (lower(target) == "drop") {
      m.set(std::string(raw), std::nullopt);
    } else if (auto label = parse_emotion(target)) {
      m.set(std::string(raw), *label);
    } else {
      throw DataError("label map line " + std::to_string(line_no) + ": unknown target '" +
                      std::string(target) + "'");
    }
  }
  return m;
}

LabelMap LabelMap::with_overrides(const LabelMap& base, const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return with_overrides(base, in);
}

std::optional<EmotionLabel> map_text_label(std::string_view raw) {
  static const LabelMap table = LabelMap::defaults();
  return table.map(raw);
}

// ---------------------------------------------------------------- loaders

Loaded<LabeledImage> load_fer_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header_record = reader.next();
  if (!header_record) throw DataError("FER csv: empty file");
  const auto header = normalized_header(*header_record);
  const std::size_t emotion_col = column_or_throw(header, "emotion", "FER");
  const std::size_t pixels_col = column_or_throw(header, "pixels", "FER");
  const std::size_t needed = std::max(emotion_col, pixels_col) + 1;

  Loaded<LabeledImage> out;
  LoadReport& report = out.report;
  std::size_t row = 0;
  while (auto record = reader.next()) {
    if (is_blank(*record)) continue;
    ++row;
    ++report.total_rows;
    const auto fail = [&](std::string reason) {
      report.errors.push_back({row, std::move(reason)});
    };
    if (record->fields.size() < needed) {
      fail("expected at least " + std::to_string(needed) + " fields, got " +
           std::to_string(record->fields.size()));
      continue;
    }
    const auto code = parse_int<int>(trim(record->fields[emotion_col]));
    if (!code) {
      fail("non-numeric emotion code '" + record->fields[emotion_col] + "'");
      continue;
    }
    if (*code < 0 || *code > 6) {
      fail("emotion code " + std::to_string(*code) + " outside 0..6");
      continue;
    }
    const auto label = map_fer_label(*code);
    if (!label) {
      ++report.dropped_by_label[std::string(fer_code_name(*code))];
      continue;
    }

    LabeledImage image;
    image.label = *label;
    std::string_view pixels = record->fields[pixels_col];
    std::size_t count = 0;
    bool ok = true;
    std::size_t pos = 0;
    while (ok) {
      while (pos < pixels.size() && std::isspace(static_cast<unsigned char>(pixels[pos]))) ++pos;
      if (pos >= pixels.size()) break;
      std::size_t end = pos;
      while (end < pixels.size() && !std::isspace(static_cast<unsigned char>(pixels[end]))) ++end;
      const std::string_view token = pixels.substr(pos, end - pos);
      pos = end;
      const auto value = parse_int<int>(token);
      if (!value) {
        fail("non-numeric pixel token '" + std::string(token) + "'");
        ok = false;
      } else if (*value < 0 || *value > 255) {
        fail("pixel value " + std::to_string(*value) + " outside 0..255");
        ok = false;
      } else {
        if (count < kFerPixels) image.pixels[count] = static_cast<std::uint8_t>(*value);
        ++count;
      }
    }
    if (!ok) continue;
    if (count != kFerPixels) {
      fail("pixel count " + std::to_string(count) + " ≠ " + std::to_string(kFerPixels));
      continue;
    }
    out.records.push_back(image);
    ++report.kept;
  }
  return out;
}

Loaded<LabeledImage> load_fer_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return load_fer_csv(in);
}

Loaded<LabeledText> load_tweet_csv(std::istream& in, const LabelMap& labels) {
  csv::Reader reader(in);
  auto header_record = reader.next();
  if (!header_record) throw DataError("tweet csv: empty file");
  const auto header = normalized_header(*header_record);
  const std::size_t id_col = column_or_throw(header, "tweet_id", "tweet");
  const std::size_t sentiment_col = column_or_throw(header, "sentiment", "tweet");
  const std::size_t author_col = column_or_throw(header, "author", "tweet");
  const std::size_t content_col = column_or_throw(header, "content", "tweet");
  const std::size_t needed = header.size();

  Loaded<LabeledText> out;
  LoadReport& report = out.report;
  std::size_t row = 0;
  while (auto record = reader.next()) {
    if (is_blank(*record)) continue;
    ++row;
    ++report.total_rows;
    if (record->fields.size() != needed) {
      report.errors.push_back({row, "expected " + std::to_string(needed) + " fields, got " +
                                        std::to_string(record->fields.size())});
      continue;
    }
    const std::string raw = lower(trim(record->fields[sentiment_col]));
    const auto label = labels.map(raw);
    if (!label) {
      ++report.dropped_by_label[raw];
      continue;
    }
    const std::string_view content = trim(record->fields[content_col]);
    if (content.empty()) {
      ++report.dropped_by_label["<empty content>"];
      continue;
    }
    LabeledText text;
    text.id = std::string(trim(record->fields[id_col]));
    if (const auto author = trim(record->fields[author_col]); !author.empty()) {
      text.author = std::string(author);
    }
    text.content = std::string(content);
    text.label = *label;
    out.records.push_back(std::move(text));
    ++report.kept;
  }
  return out;
}

Loaded<LabeledText> load_tweet_csv(const std::filesystem::path& path, const LabelMap& labels) {
  auto in = open_or_throw(path);
  return load_tweet_csv(in, labels);
}

// ---------------------------------------------------------------- split

SplitIndices split_indices(std::span<const EmotionLabel> labels, const SplitSpec& spec) {
  if (labels.empty()) throw InvalidArgument("split_dataset: no records");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw InvalidArgument("split_dataset: train_fraction must lie in (0,1)");
  }
  std::array<std::vector<std::size_t>, kEmotionCount> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[index_of(labels[i])].push_back(i);

  Rng rng(spec.seed);
  SplitIndices out;
  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    auto& members = by_label[k];
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw InvalidArgument("split_dataset: cannot stratify label " +
                            std::string(to_string(label_at(k))) + " with " +
                            std::to_string(members.size()) + " record");
    }
    const auto n = static_cast<double>(members.size());
    auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * n));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    rng.shuffle(std::span(members));
    out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
    out.validation.insert(out.validation.end(), members.begin() + n_train, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

}  // namespace liesensor::corpus
