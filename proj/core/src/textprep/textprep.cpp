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

#include "liesensor/textprep/textprep.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_map>

#include "liesensor/error.hpp"

namespace liesensor::textprep {

namespace {

constexpr bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
constexpr bool is_ascii_alnum(char c) { return is_ascii_alpha(c) || (c >= '0' && c <= '9'); }
constexpr bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
constexpr bool is_mention_char(char c) { return is_ascii_alnum(c) || c == '_'; }
constexpr char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool url_starts_at(std::string_view s, std::size_t i) {
  const std::string_view rest = s.substr(i);
  return rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www.");
}

std::string normalize_once(std::string_view in) {
  std::string s;
  s.reserve(in.size());
  for (char c : in) {
    if (c != '#') s.push_back(to_lower(c));
  }

  std::string stripped;
  stripped.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (url_starts_at(s, i)) {
      while (i < s.size() && !is_space(s[i])) ++i;
    } else if (s[i] == '@' && i + 1 < s.size() && is_mention_char(s[i + 1])) {
      ++i;
      while (i < s.size() && is_mention_char(s[i])) ++i;
    } else {
      stripped.push_back(s[i++]);
    }
  }

  std::string collapsed;
  collapsed.reserve(stripped.size());
  for (char c : stripped) {
    const std::size_t n = collapsed.size();
    if (is_ascii_alpha(c) && n >= 2 && collapsed[n - 1] == c && collapsed[n - 2] == c) continue;
    collapsed.push_back(c);
  }

  std::string out;
  out.reserve(collapsed.size());
  bool pending_space = false;
  for (char c : collapsed) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool has_vowel(std::string_view s) {
  return s.find_first_of("aeiou") != std::string_view::npos;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  std::string current = normalize_once(raw);
  for (;;) {
    std::string next = normalize_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

TokenizedDoc tokenize(std::string_view normalized) {
  TokenizedDoc doc;
  std::size_t i = 0;
  while (i < normalized.size()) {
    while (i < normalized.size() && !is_ascii_alnum(normalized[i])) ++i;
    const std::size_t start = i;
    while (i < normalized.size() && is_ascii_alnum(normalized[i])) ++i;
    if (i > start) doc.tokens.emplace_back(normalized.substr(start, i - start));
  }
  return doc;
}

std::string lemmatize(std::string_view token) {
  std::string t(token);
  for (;;) {
    const std::string_view v = t;
    if (v.ends_with("sses")) {
      t.resize(t.size() - 2);
    } else if (v.ends_with("ies") && v.size() > 4) {
      t.resize(t.size() - 3);
      t.push_back('y');
    } else if (v.ends_with('s') && v.size() > 3 && !v.ends_with("ss")) {
      t.pop_back();
    } else if (v.ends_with("ing") && has_vowel(v.substr(0, v.size() - 3))) {
      t.resize(t.size() - 3);
    } else if (v.ends_with("ed") && has_vowel(v.substr(0, v.size() - 2))) {
      t.resize(t.size() - 2);
    } else {
      return t;
    }
  }
}

TokenizedDoc preprocess(std::string_view raw) {
  TokenizedDoc doc = tokenize(normalize_text(raw));
  for (auto& token : doc.tokens) token = lemmatize(token);
  return doc;
}

// ---------------------------------------------------------------- Vocabulary

Vocabulary Vocabulary::build(std::span<const TokenizedDoc> docs, std::uint64_t min_count) {
  if (min_count < 1) throw InvalidArgument("build_vocabulary: min_count must be >= 1");

  struct Counts {
    std::uint64_t total = 0;
    std::uint64_t docs = 0;
    std::size_t last_doc = SIZE_MAX;
  };
  std::unordered_map<std::string_view, Counts> counts;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& token : docs[d].tokens) {
      Counts& c = counts[token];
      ++c.total;
      if (c.last_doc != d) {
        ++c.docs;
        c.last_doc = d;
      }
    }
  }

  struct Candidate {
    std::string_view term;
    Counts counts;
  };
  std::vector<Candidate> kept;
  for (const auto& [term, c] : counts) {
    if (c.total >= min_count) kept.push_back({term, c});
  }
  if (kept.empty()) throw DataError("empty vocabulary");
  std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
    if (a.counts.total != b.counts.total) return a.counts.total > b.counts.total;
    return a.term < b.term;
  });

  Vocabulary vocab;
  vocab.min_count_ = min_count;
  vocab.entries_.reserve(kept.size());
  for (const auto& c : kept) vocab.entries_.push_back({std::string(c.term), c.counts.docs});
  vocab.rebuild_index();
  return vocab;
}

void Vocabulary::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].term, i);
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view term) const {
  const auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::write(std::ostream& out) const {
  out << "vocabulary\t" << entries_.size() << '\t' << min_count_ << '\n';
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out << entries_[i].term << '\t' << i << '\t' << entries_[i].doc_freq << '\n';
  }
}

std::string Vocabulary::serialize() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    parts.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) return parts;
    start = tab + 1;
  }
}

std::uint64_t parse_u64(std::string_view s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw DataError("vocabulary line " + std::to_string(line_no) + ": bad integer '" +
                    std::string(s) + "'");
  }
  return v;
}

}  // namespace

Vocabulary Vocabulary::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("vocabulary: missing header");
  const auto header = split_tabs(line);
  if (header.size() != 3 || header[0] != "vocabulary") {
    throw DataError("vocabulary: malformed header '" + line + "'");
  }
  const std::uint64_t size = parse_u64(header[1], 1);
  Vocabulary vocab;
  vocab.min_count_ = parse_u64(header[2], 1);
  if (vocab.min_count_ < 1) throw DataError("vocabulary: min_count must be >= 1");
  if (size == 0) throw DataError("empty vocabulary");
  vocab.entries_.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(size, 1u << 24)));
  for (std::uint64_t i = 0; i < size; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    if (!std::getline(in, line)) {
      throw DataError("vocabulary: expected " + std::to_string(size) + " terms, found " +
                      std::to_string(i));
    }
    const auto parts = split_tabs(line);
    if (parts.size() != 3) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": expected 3 fields");
    }
    if (parts[0].empty() || !std::all_of(parts[0].begin(), parts[0].end(), is_ascii_alnum)) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": bad term");
    }
    if (parse_u64(parts[1], line_no) != i) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": index out of order");
    }
    vocab.entries_.push_back({std::string(parts[0]), parse_u64(parts[2], line_no)});
  }
  vocab.rebuild_index();
  if (vocab.index_.size() != vocab.entries_.size()) {
    throw DataError("vocabulary: duplicate terms");
  }
  return vocab;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read(in);
}

}  // namespace liesensor::textprep
