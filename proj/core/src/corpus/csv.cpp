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

#include "liesensor/corpus/csv.hpp"

#include <sstream>

#include "liesensor/error.hpp"

namespace liesensor::csv {

std::optional<Record> Reader::next() {
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return std::nullopt;

  Record record;
  record.line = line_;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;

  for (; c != std::char_traits<char>::eof(); c = in_.get()) {
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (ch == ',') {
      record.fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (ch == '\r' && in_.peek() == '\n') {
      // swallowed; the '\n' ends the record
    } else if (ch == '\n') {
      ++line_;
      record.fields.push_back(std::move(field));
      return record;
    } else {
      field.push_back(ch);
    }
  }

  if (in_quotes) {
    throw DataError("csv: unterminated quoted field starting on line " +
                    std::to_string(record.line));
  }
  record.fields.push_back(std::move(field));
  return record;
}

std::vector<Record> parse_all(const std::string& text) {
  std::istringstream in(text);
  Reader reader(in);
  std::vector<Record> out;
  while (auto record = reader.next()) out.push_back(std::move(*record));
  return out;
}

}  // namespace liesensor::csv
