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
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace liesensor::csv {

/// One parsed record plus the 1-based physical line it started on.
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// Streaming reader for comma-separated UTF-8 text with RFC 4180 quoting:
/// fields may be wrapped in double quotes, quotes inside are doubled, and
/// quoted fields may contain commas and line breaks. CRLF is accepted.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws DataError on an
  /// unterminated quoted field.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

/// Parses a whole string (convenience for tests and small inputs).
std::vector<Record> parse_all(const std::string& text);

}  // namespace liesensor::csv
