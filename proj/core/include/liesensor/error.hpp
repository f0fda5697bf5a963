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

#include <stdexcept>
#include <string>

namespace liesensor {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: CSV rows, XML, PGM, vocabulary or model files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A serialized artifact failed its integrity check (truncation, bit rot).
class ChecksumError : public DataError {
 public:
  using DataError::DataError;
};

/// Tensor / feature-space dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (NaN/Inf loss or gradient).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace liesensor
