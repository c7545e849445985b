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
#include <string>
#include <string_view>
#include <vector>

#include "lareval/mask.hpp"

namespace lareval {

/// COCO run-length mask: column-major runs, alternating background and
/// foreground, starting with a (possibly empty) background run.
struct Rle {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const Rle&, const Rle&) = default;
};

Rle rle_encode(const BinaryMask& m);

/// Throws kLength when the counts do not sum to height × width.
BinaryMask rle_decode(const Rle& rle);

/// Decodes the compressed text form. Throws kCodec with the offending
/// character index, or kLength on a sum mismatch.
BinaryMask rle_decode(std::string_view compressed, int height, int width);

/// COCO variable-length text encoding of the counts (6-bit groups offset by
/// 48, counts after the second stored as deltas against counts[i - 2]).
std::string rle_counts_to_string(const std::vector<std::uint32_t>& counts);
std::vector<std::uint32_t> rle_counts_from_string(std::string_view compressed);

/// Sum of foreground runs.
std::int64_t rle_area(const Rle& rle);

}  // namespace lareval
