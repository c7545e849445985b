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

#include "lareval/rle.hpp"

#include <limits>
#include <numeric>

#include "lareval/errors.hpp"

namespace lareval {
namespace {

void check_total(const Rle& rle) {
  const std::uint64_t total =
      std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
  if (rle.height < 1 || rle.width < 1 ||
      total != static_cast<std::uint64_t>(rle.height) * static_cast<std::uint64_t>(rle.width)) {
    throw Error(ErrorKind::kLength, "rle length mismatch: counts sum to " + std::to_string(total) +
                                        " for size " + std::to_string(rle.height) + "x" +
                                        std::to_string(rle.width));
  }
}

}  // namespace

Rle rle_encode(const BinaryMask& m) {
  Rle rle{m.height(), m.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < m.width(); ++x) {
    for (int y = 0; y < m.height(); ++y) {
      const std::uint8_t v = m(x, y) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const Rle& rle) {
  check_total(rle);
  BinaryMask m(rle.width, rle.height);
  const std::int64_t h = rle.height;
  std::int64_t flat = 0;
  bool value = false;
  for (const std::uint32_t run : rle.counts) {
    if (value) {
      for (std::int64_t k = flat; k < flat + run; ++k) {
        m.set(static_cast<int>(k / h), static_cast<int>(k % h));
      }
    }
    flat += run;
    value = !value;
  }
  return m;
}

BinaryMask rle_decode(std::string_view compressed, int height, int width) {
  return rle_decode(Rle{height, width, rle_counts_from_string(compressed)});
}

std::string rle_counts_to_string(const std::vector<std::uint32_t>& counts) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t x = counts[i];
    if (i > 2) x -= static_cast<std::int64_t>(counts[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      out.push_back(static_cast<char>(c + 48));
    }
  }
  return out;
}

std::vector<std::uint32_t> rle_counts_from_string(std::string_view compressed) {
  std::vector<std::uint32_t> counts;
  std::size_t p = 0;
  while (p < compressed.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    const std::size_t start = p;
    while (more) {
      if (p >= compressed.size()) {
        throw Error(ErrorKind::kCodec,
                    "truncated compressed rle value starting at character " + std::to_string(start),
                    static_cast<std::int64_t>(start));
      }
      const int c = static_cast<unsigned char>(compressed[p]) - 48;
      if (c < 0 || c > 63) {
        throw Error(ErrorKind::kCodec,
                    "invalid compressed rle character at index " + std::to_string(p),
                    static_cast<std::int64_t>(p));
      }
      if (k >= 12) {
        throw Error(ErrorKind::kCodec, "compressed rle value too long at index " + std::to_string(p),
                    static_cast<std::int64_t>(p));
      }
      x |= static_cast<std::int64_t>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -(std::int64_t{1} << (5 * k));
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    if (x < 0 || x > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorKind::kCodec,
                  "compressed rle run out of range at character " + std::to_string(start),
                  static_cast<std::int64_t>(start));
    }
    counts.push_back(static_cast<std::uint32_t>(x));
  }
  return counts;
}

std::int64_t rle_area(const Rle& rle) {
  std::int64_t area = 0;
  for (std::size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
  return area;
}

}  // namespace lareval
