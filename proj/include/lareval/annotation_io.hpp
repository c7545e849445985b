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

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lareval/mask.hpp"
#include "lareval/rle.hpp"

namespace lareval {

using Point2d = Eigen::Vector2d;
using Ring = std::vector<Point2d>;

/// One or more polygon rings in pixel coordinates; rings of one instance are
/// unioned when rasterized.
struct Polygons {
  std::vector<Ring> rings;
};

using SegmentationGeometry = std::variant<Polygons, Rle>;

struct ImageInfo {
  std::int64_t image_id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;
};

struct CategoryInfo {
  std::int64_t category_id = 0;
  std::string name;
};

struct DatasetDescriptor {
  std::vector<ImageInfo> images;
  std::vector<CategoryInfo> categories;

  /// nullptr when the id is unknown.
  const ImageInfo* find_image(std::int64_t image_id) const;
  bool has_category(std::int64_t category_id) const;
};

struct GtInstance {
  std::int64_t annotation_id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  SegmentationGeometry geometry;
};

struct PredInstance {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  SegmentationGeometry geometry;
  double score = 1.0;
};

struct CocoGroundTruth {
  DatasetDescriptor descriptor;
  std::vector<GtInstance> instances;
};

struct CocoPredictions {
  std::vector<PredInstance> instances;
  /// Records skipped because their geometry rasterized to nothing.
  std::vector<std::string> diagnostics;
};

/// COCO instance JSON. Annotations keep file order.
CocoGroundTruth parse_coco_ground_truth(std::string_view document);

/// COCO results array, validated against the descriptor's image sizes.
CocoPredictions parse_coco_predictions(std::string_view document,
                                       const DatasetDescriptor& descriptor);

struct YoloInstance {
  int class_id = 0;
  Polygons geometry;
  double score = 1.0;
};

struct YoloParseResult {
  std::vector<YoloInstance> instances;
  /// Coordinates that were outside [0, 1] and got clamped.
  int clamped_coordinates = 0;
};

/// `class x1 y1 ... xn yn [conf]` per line, normalized coordinates.
YoloParseResult parse_yolo_segmentation(std::string_view lines, int image_width,
                                        int image_height, bool with_confidence);

/// Inverse of the YOLO parser for one instance (no trailing newline).
std::string format_yolo_line(const YoloInstance& instance, int image_width, int image_height,
                             bool with_confidence);

/// Pixel-center even-odd fill for polygons (vertices clamped to the canvas);
/// column-major decode for RLE. Throws kGeometry on rings with < 3 vertices
/// and kShape when an RLE size disagrees with the canvas.
BinaryMask rasterize(const SegmentationGeometry& geometry, int width, int height);

/// Foreground area without keeping the mask around.
std::int64_t geometry_area(const SegmentationGeometry& geometry, int width, int height);

/// Instances read from a raster manifest: JSON
/// {"instances": [{"image_id": 1, "path": "a.png", "score": 0.9}, ...]}.
/// Paths are relative to the manifest's directory; geometry is stored as RLE.
struct RasterManifest {
  DatasetDescriptor descriptor;
  std::vector<PredInstance> instances;  // score defaults to 1.0
};

RasterManifest load_raster_manifest(const std::filesystem::path& manifest_path);

/// COCO results array with compressed-RLE segmentations.
std::string write_coco_predictions(const std::vector<PredInstance>& predictions);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace lareval
