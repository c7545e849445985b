// Copyright 2026 The lareval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace lareval {

/// Error classes raised by the library. Every one of them is an input or
/// validation problem; the CLI maps them to exit code 1.
enum class ErrorKind {
  kParse,      // malformed JSON / text
  kSchema,     // missing or mistyped key
  kReference,  // unknown image_id / category_id
  kRange,      // value outside its allowed interval
  kFormat,     // malformed YOLO line
  kGeometry,   // degenerate polygon ring, empty geometry
  kLength,     // RLE counts do not cover the canvas
  kCodec,      // malformed compressed RLE text
  kShape,      // canvas dimension mismatch
  kEmptiness,  // operation requires a nonempty mask / path
  kPlacement,  // synthetic scene could not be placed
  kIo,         // file system / PNG failures
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::int64_t> position = std::nullopt)
      : std::runtime_error(message), kind_(kind), position_(position) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Byte offset, character index or 1-based line number, depending on kind.
  std::optional<std::int64_t> position() const noexcept { return position_; }

 private:
  ErrorKind kind_;
  std::optional<std::int64_t> position_;
};

}  // namespace lareval
