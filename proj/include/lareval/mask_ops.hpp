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

#include <optional>
#include <vector>

#include "lareval/mask.hpp"

namespace lareval {

enum class Connectivity { kFour = 4, kEight = 8 };

/// |a ∩ b| / |a ∪ b|, 0 for an empty union. Throws kShape on canvas mismatch.
double iou_mask(const BinaryMask& a, const BinaryMask& b);

/// Intersection area restricted to the overlap of two boxes known to contain
/// all foreground of `a` and `b` respectively.
std::int64_t intersection_area(const BinaryMask& a, const PixelBox& box_a,
                               const BinaryMask& b, const PixelBox& box_b);

/// Inclusive-pixel-count intersection over union.
double iou_box(const PixelBox& a, const PixelBox& b);

/// Tightest inclusive box. Throws kEmptiness for an empty mask.
PixelBox bounding_box(const BinaryMask& m);

/// Same as bounding_box, but empty masks yield nullopt.
std::optional<PixelBox> try_bounding_box(const BinaryMask& m);

/// Components on the original canvas, ordered by descending area and then by
/// the raster position (y, x) of their first pixel.
std::vector<BinaryMask> connected_components(const BinaryMask& m,
                                             Connectivity connectivity = Connectivity::kEight);

/// Number of components without materialising them.
int count_components(const BinaryMask& m, Connectivity connectivity = Connectivity::kEight);

/// Sets every background region not 4-connected to the canvas border.
BinaryMask fill_holes(const BinaryMask& m);

/// Disc structuring element: (dx, dy) with dx² + dy² ≤ radius².
std::vector<Point2i> disc_offsets(int radius);

/// Disc dilation clipped to the canvas.
BinaryMask dilate(const BinaryMask& m, int radius);

/// Disc erosion; pixels outside the canvas count as background.
BinaryMask erode(const BinaryMask& m, int radius);

/// Dilation followed by erosion, evaluated on an unbounded plane and cropped
/// back to the canvas, so the result is extensive and idempotent.
BinaryMask morphological_close(const BinaryMask& m, int radius);

}  // namespace lareval
