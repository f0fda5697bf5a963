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

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace liesensor::textprep {

/// Ordered lowercase alphanumeric word tokens.
struct TokenizedDoc {
  std::vector<std::string> tokens;

  friend bool operator==(const TokenizedDoc&, const TokenizedDoc&) = default;
};

/// Lowercases ASCII, removes '#' (keeping the hashtag body), URLs
/// (http://, https://, www. up to the next whitespace) and @mentions,
/// collapses every run of 3+ identical letters to 2, and squeezes
/// whitespace runs to one space with no leading or trailing space. The rules
/// are iterated to a fixed point, so the function is idempotent. Non-ASCII
/// bytes pass through untouched.
std::string normalize_text(std::string_view raw);

/// Splits on every run of non-alphanumeric bytes; empty pieces are dropped.
TokenizedDoc tokenize(std::string_view normalized);

/// Suffix-rule reduction applied until no rule fires:
///   sses -> ss;  ies -> y (length > 4);  trailing s dropped (length > 3,
///   not "ss");  ing / ed stripped when the remaining stem has a vowel.
std::string lemmatize(std::string_view token);

/// normalize -> tokenize -> lemmatize, the full text-channel preprocessing.
TokenizedDoc preprocess(std::string_view raw);

/// Dense term index built from a tokenized corpus with rare words removed.
class Vocabulary {
 public:
  struct Entry {
    std::string term;
    std::uint64_t doc_freq = 0;
  };

  /// Terms with corpus frequency below `min_count` are removed; indices go
  /// by descending corpus frequency, ties broken lexicographically. Throws
  /// InvalidArgument for min_count < 1 and DataError("empty vocabulary")
  /// when nothing survives.
  static Vocabulary build(std::span<const TokenizedDoc> docs, std::uint64_t min_count);

  std::size_t size() const { return entries_.size(); }
  std::uint64_t min_count() const { return min_count_; }

  std::optional<std::size_t> index_of(std::string_view term) const;
  const Entry& at(std::size_t index) const { return entries_.at(index); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Header `vocabulary<TAB>V<TAB>min_count`, then one
  /// `term<TAB>index<TAB>doc_freq` line per term in index order.
  void write(std::ostream& out) const;
  std::string serialize() const;
  static Vocabulary read(std::istream& in);
  static Vocabulary deserialize(std::string_view text);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.min_count_ == b.min_count_ && a.serialize() == b.serialize();
  }

 private:
  void rebuild_index();

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::uint64_t min_count_ = 1;
};

inline Vocabulary build_vocabulary(std::span<const TokenizedDoc> docs, std::uint64_t min_count) {
  return Vocabulary::build(docs, min_count);
}

}  // namespace liesensor::textprep
