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

#include "lareval/annotation_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "lareval/errors.hpp"
#include "lareval/png_io.hpp"

namespace lareval {
namespace {

using nlohmann::json;

json parse_json(std::string_view document) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse,
                "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                static_cast<std::int64_t>(e.byte));
  }
}

const json& require(const json& object, const char* key, const std::string& where) {
  if (!object.is_object()) throw Error(ErrorKind::kSchema, where + " is not an object");
  const auto it = object.find(key);
  if (it == object.end()) {
    throw Error(ErrorKind::kSchema, "missing required key '" + std::string(key) + "' in " + where);
  }
  return *it;
}

std::int64_t require_int(const json& object, const char* key, const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_number_integer()) {
    throw Error(ErrorKind::kSchema, "key '" + std::string(key) + "' in " + where +
                                        " must be an integer");
  }
  return v.get<std::int64_t>();
}

double require_number(const json& object, const char* key, const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_number()) {
    throw Error(ErrorKind::kSchema, "key '" + std::string(key) + "' in " + where +
                                        " must be a number");
  }
  return v.get<double>();
}

const json& require_array(const json& object, const char* key, const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_array()) {
    throw Error(ErrorKind::kSchema, "key '" + std::string(key) + "' in " + where +
                                        " must be an array");
  }
  return v;
}

Point2d clamp_point(Point2d p, int width, int height) {
  return {std::clamp(p.x(), 0.0, static_cast<double>(width)),
          std::clamp(p.y(), 0.0, static_cast<double>(height))};
}

SegmentationGeometry parse_segmentation(const json& seg, const ImageInfo& image,
                                        const std::string& where) {
  if (seg.is_array()) {
    Polygons polys;
    for (const json& flat : seg) {
      if (!flat.is_array() || flat.size() % 2 != 0) {
        throw Error(ErrorKind::kGeometry, where + ": polygon must be a flat list of x,y pairs");
      }
      if (flat.size() < 6) {
        throw Error(ErrorKind::kGeometry, where + ": polygon ring has fewer than 3 vertices");
      }
      Ring ring;
      for (std::size_t k = 0; k < flat.size(); k += 2) {
        if (!flat[k].is_number() || !flat[k + 1].is_number()) {
          throw Error(ErrorKind::kSchema, where + ": polygon coordinates must be numbers");
        }
        ring.push_back(clamp_point({flat[k].get<double>(), flat[k + 1].get<double>()},
                                   image.width, image.height));
      }
      polys.rings.push_back(std::move(ring));
    }
    if (polys.rings.empty()) throw Error(ErrorKind::kGeometry, where + ": no polygon rings");
    return polys;
  }
  if (seg.is_object()) {
    const json& size = require_array(seg, "size", where + " segmentation");
    if (size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer()) {
      throw Error(ErrorKind::kSchema, where + ": rle 'size' must be [height, width]");
    }
    Rle rle;
    rle.height = size[0].get<int>();
    rle.width = size[1].get<int>();
    if (rle.height != image.height || rle.width != image.width) {
      throw Error(ErrorKind::kShape, where + ": rle size " + std::to_string(rle.height) + "x" +
                                         std::to_string(rle.width) + " differs from image " +
                                         std::to_string(image.height) + "x" +
                                         std::to_string(image.width));
    }
    const json& counts = require(seg, "counts", where + " segmentation");
    if (counts.is_string()) {
      rle.counts = rle_counts_from_string(counts.get_ref<const std::string&>());
    } else if (counts.is_array()) {
      for (const json& c : counts) {
        if (!c.is_number_integer() || c.get<std::int64_t>() < 0) {
          throw Error(ErrorKind::kSchema, where + ": rle counts must be nonnegative integers");
        }
        rle.counts.push_back(c.get<std::uint32_t>());
      }
    } else {
      throw Error(ErrorKind::kSchema, where + ": rle 'counts' must be a list or a string");
    }
    std::uint64_t total = 0;
    for (auto c : rle.counts) total += c;
    if (total != static_cast<std::uint64_t>(rle.height) * static_cast<std::uint64_t>(rle.width)) {
      throw Error(ErrorKind::kLength, where + ": rle length mismatch (counts sum to " +
                                          std::to_string(total) + ", expected " +
                                          std::to_string(std::int64_t{rle.height} * rle.width) +
                                          ")");
    }
    return rle;
  }
  throw Error(ErrorKind::kSchema, where + ": 'segmentation' must be a polygon list or an rle object");
}

// Crossings of the horizontal line through row centres with one ring, filled
// even-odd into `mask`.
void fill_ring(const Ring& ring, BinaryMask& mask) {
  if (ring.size() < 3) {
    throw Error(ErrorKind::kGeometry,
                "degenerate polygon ring with " + std::to_string(ring.size()) + " vertices");
  }
  const int w = mask.width();
  const int h = mask.height();
  double y_lo = ring[0].y();
  double y_hi = ring[0].y();
  for (const auto& p : ring) {
    y_lo = std::min(y_lo, p.y());
    y_hi = std::max(y_hi, p.y());
  }
  const int row_begin = std::max(0, static_cast<int>(std::floor(y_lo - 0.5)));
  const int row_end = std::min(h - 1, static_cast<int>(std::ceil(y_hi)));
  std::vector<double> xs;
  for (int j = row_begin; j <= row_end; ++j) {
    const double yc = j + 0.5;
    xs.clear();
    for (std::size_t k = 0; k < ring.size(); ++k) {
      const Point2d& a = ring[k];
      const Point2d& b = ring[(k + 1) % ring.size()];
      if ((a.y() <= yc) != (b.y() <= yc)) {
        xs.push_back(a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel i is inside iff xs[k] <= i + 0.5 < xs[k + 1].
      const int i0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int i1 = std::min(w, static_cast<int>(std::ceil(xs[k + 1] - 0.5)));
      for (int i = i0; i < i1; ++i) mask.set(i, j);
    }
  }
}

std::string image_where(const char* kind, std::size_t index) {
  return std::string(kind) + "[" + std::to_string(index) + "]";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const ImageInfo* DatasetDescriptor::find_image(std::int64_t image_id) const {
  for (const auto& img : images) {
    if (img.image_id == image_id) return &img;
  }
  return nullptr;
}

bool DatasetDescriptor::has_category(std::int64_t category_id) const {
  return std::any_of(categories.begin(), categories.end(),
                     [&](const CategoryInfo& c) { return c.category_id == category_id; });
}

BinaryMask rasterize(const SegmentationGeometry& geometry, int width, int height) {
  if (const auto* rle = std::get_if<Rle>(&geometry)) {
    if (rle->width != width || rle->height != height) {
      throw Error(ErrorKind::kShape, "rle size does not match the canvas");
    }
    return rle_decode(*rle);
  }
  BinaryMask mask(width, height);
  const auto& polys = std::get<Polygons>(geometry);
  for (const Ring& ring : polys.rings) {
    if (polys.rings.size() == 1) {
      Ring clamped;
      clamped.reserve(ring.size());
      for (const auto& p : ring) clamped.push_back(clamp_point(p, width, height));
      fill_ring(clamped, mask);
    } else {
      // Union of independently even-odd filled rings.
      BinaryMask part(width, height);
      Ring clamped;
      for (const auto& p : ring) clamped.push_back(clamp_point(p, width, height));
      fill_ring(clamped, part);
      for (std::int64_t i = 0; i < mask.pixel_count(); ++i) mask.data()[i] |= part.data()[i];
    }
  }
  return mask;
}

std::int64_t geometry_area(const SegmentationGeometry& geometry, int width, int height) {
  if (const auto* rle = std::get_if<Rle>(&geometry)) return rle_area(*rle);
  return rasterize(geometry, width, height).area();
}

CocoGroundTruth parse_coco_ground_truth(std::string_view document) {
  const json doc = parse_json(document);
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "ground truth document must be an object");
  CocoGroundTruth out;

  const json& images = require_array(doc, "images", "document");
  std::set<std::int64_t> seen_images;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = image_where("images", i);
    ImageInfo info;
    info.image_id = require_int(images[i], "id", where);
    info.width = static_cast<int>(require_int(images[i], "width", where));
    info.height = static_cast<int>(require_int(images[i], "height", where));
    if (const auto it = images[i].find("file_name"); it != images[i].end() && it->is_string()) {
      info.file_name = it->get<std::string>();
    }
    if (info.width < 1 || info.height < 1) {
      throw Error(ErrorKind::kRange, where + ": width and height must be >= 1");
    }
    if (!seen_images.insert(info.image_id).second) {
      throw Error(ErrorKind::kSchema, "duplicate image id " + std::to_string(info.image_id));
    }
    out.descriptor.images.push_back(std::move(info));
  }

  const json& categories = require_array(doc, "categories", "document");
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const std::string where = image_where("categories", i);
    CategoryInfo cat;
    cat.category_id = require_int(categories[i], "id", where);
    if (const auto it = categories[i].find("name"); it != categories[i].end() && it->is_string()) {
      cat.name = it->get<std::string>();
    }
    out.descriptor.categories.push_back(std::move(cat));
  }

  std::unordered_map<std::int64_t, const ImageInfo*> by_id;
  for (const auto& img : out.descriptor.images) by_id.emplace(img.image_id, &img);

  const json& annotations = require_array(doc, "annotations", "document");
  out.instances.reserve(annotations.size());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const std::string where = image_where("annotations", i);
    GtInstance inst;
    inst.annotation_id = require_int(annotations[i], "id", where);
    inst.image_id = require_int(annotations[i], "image_id", where);
    inst.category_id = require_int(annotations[i], "category_id", where);
    const auto img = by_id.find(inst.image_id);
    if (img == by_id.end()) {
      throw Error(ErrorKind::kReference,
                  where + " references unknown image_id " + std::to_string(inst.image_id));
    }
    if (!out.descriptor.has_category(inst.category_id)) {
      throw Error(ErrorKind::kReference,
                  where + " references unknown category_id " + std::to_string(inst.category_id));
    }
    inst.geometry = parse_segmentation(require(annotations[i], "segmentation", where),
                                       *img->second, where);
    if (geometry_area(inst.geometry, img->second->width, img->second->height) < 1) {
      throw Error(ErrorKind::kGeometry, where + " (annotation id " +
                                            std::to_string(inst.annotation_id) +
                                            ") has an empty geometry");
    }
    out.instances.push_back(std::move(inst));
  }
  return out;
}

CocoPredictions parse_coco_predictions(std::string_view document,
                                       const DatasetDescriptor& descriptor) {
  const json doc = parse_json(document);
  if (!doc.is_array()) throw Error(ErrorKind::kSchema, "predictions document must be a JSON array");
  std::unordered_map<std::int64_t, const ImageInfo*> by_id;
  for (const auto& img : descriptor.images) by_id.emplace(img.image_id, &img);

  CocoPredictions out;
  out.instances.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = image_where("predictions", i);
    PredInstance inst;
    inst.image_id = require_int(doc[i], "image_id", where);
    inst.category_id = require_int(doc[i], "category_id", where);
    inst.score = require_number(doc[i], "score", where);
    if (!(inst.score >= 0.0 && inst.score <= 1.0)) {
      throw Error(ErrorKind::kRange, where + ": score " + format_double(inst.score) +
                                         " outside [0, 1]");
    }
    const auto img = by_id.find(inst.image_id);
    if (img == by_id.end()) {
      throw Error(ErrorKind::kReference,
                  where + " references unknown image_id " + std::to_string(inst.image_id));
    }
    if (!descriptor.categories.empty() && !descriptor.has_category(inst.category_id)) {
      throw Error(ErrorKind::kReference,
                  where + " references unknown category_id " + std::to_string(inst.category_id));
    }
    inst.geometry = parse_segmentation(require(doc[i], "segmentation", where), *img->second, where);
    if (geometry_area(inst.geometry, img->second->width, img->second->height) < 1) {
      out.diagnostics.push_back(where + ": empty prediction mask skipped");
      continue;
    }
    out.instances.push_back(std::move(inst));
  }
  return out;
}

YoloParseResult parse_yolo_segmentation(std::string_view lines, int image_width,
                                        int image_height, bool with_confidence) {
  if (image_width < 1 || image_height < 1) {
    throw Error(ErrorKind::kRange, "image dimensions must be >= 1");
  }
  YoloParseResult out;
  std::int64_t line_no = 0;
  while (!lines.empty()) {
    const std::size_t nl = lines.find('\n');
    std::string_view line = trim(lines.substr(0, nl));
    lines = nl == std::string_view::npos ? std::string_view{} : lines.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    std::vector<std::string_view> tokens;
    std::size_t p = 0;
    while (p < line.size()) {
      while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
      std::size_t q = p;
      while (q < line.size() && line[q] != ' ' && line[q] != '\t') ++q;
      if (q > p) tokens.push_back(line.substr(p, q - p));
      p = q;
    }
    const auto fail = [&](const std::string& what) {
      throw Error(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": " + what, line_no);
    };
    std::vector<double> values;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tokens[k].data(), tokens[k].data() + tokens[k].size(), v);
      if (ec != std::errc() || ptr != tokens[k].data() + tokens[k].size()) {
        fail("invalid number '" + std::string(tokens[k]) + "'");
      }
      values.push_back(v);
    }
    YoloInstance inst;
    {
      int cls = 0;
      const auto [ptr, ec] = std::from_chars(tokens[0].data(), tokens[0].data() + tokens[0].size(), cls);
      if (ec != std::errc() || ptr != tokens[0].data() + tokens[0].size()) {
        fail("invalid class id '" + std::string(tokens[0]) + "'");
      }
      inst.class_id = cls;
    }
    if (with_confidence) {
      if (values.empty()) fail("missing confidence value");
      inst.score = values.back();
      values.pop_back();
      if (!(inst.score >= 0.0 && inst.score <= 1.0)) {
        throw Error(ErrorKind::kRange,
                    "line " + std::to_string(line_no) + ": confidence outside [0, 1]", line_no);
      }
    }
    if (values.size() % 2 != 0) {
      fail("odd coordinate count (" + std::to_string(values.size()) + ")");
    }
    if (values.size() < 6) fail("polygon needs at least 3 vertices");
    Ring ring;
    for (std::size_t k = 0; k < values.size(); k += 2) {
      double x = values[k];
      double y = values[k + 1];
      if (x < 0.0 || x > 1.0) {
        x = std::clamp(x, 0.0, 1.0);
        ++out.clamped_coordinates;
      }
      if (y < 0.0 || y > 1.0) {
        y = std::clamp(y, 0.0, 1.0);
        ++out.clamped_coordinates;
      }
      ring.emplace_back(x * image_width, y * image_height);
    }
    inst.geometry.rings.push_back(std::move(ring));
    out.instances.push_back(std::move(inst));
  }
  return out;
}

std::string format_yolo_line(const YoloInstance& instance, int image_width, int image_height,
                             bool with_confidence) {
  std::string line = std::to_string(instance.class_id);
  for (const Ring& ring : instance.geometry.rings) {
    for (const Point2d& p : ring) {
      line += ' ' + format_double(p.x() / image_width);
      line += ' ' + format_double(p.y() / image_height);
    }
  }
  if (with_confidence) line += ' ' + format_double(instance.score);
  return line;
}

RasterManifest load_raster_manifest(const std::filesystem::path& manifest_path) {
  const json doc = parse_json(read_text_file(manifest_path));
  const json& entries = require_array(doc, "instances", "manifest");
  const auto base = manifest_path.parent_path();
  RasterManifest out;
  std::map<std::int64_t, std::size_t> image_index;
  std::set<std::int64_t> categories;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string where = image_where("instances", i);
    const std::int64_t image_id = require_int(entries[i], "image_id", where);
    const json& path = require(entries[i], "path", where);
    if (!path.is_string()) throw Error(ErrorKind::kSchema, where + ": 'path' must be a string");
    PredInstance inst;
    inst.image_id = image_id;
    inst.category_id = 1;
    if (const auto it = entries[i].find("category_id"); it != entries[i].end()) {
      if (!it->is_number_integer()) throw Error(ErrorKind::kSchema, where + ": bad category_id");
      inst.category_id = it->get<std::int64_t>();
    }
    if (const auto it = entries[i].find("score"); it != entries[i].end()) {
      if (!it->is_number()) throw Error(ErrorKind::kSchema, where + ": 'score' must be a number");
      inst.score = it->get<double>();
      if (!(inst.score >= 0.0 && inst.score <= 1.0)) {
        throw Error(ErrorKind::kRange, where + ": score outside [0, 1]");
      }
    }
    const std::string rel = path.get<std::string>();
    const BinaryMask mask = read_png_mask(base / rel);
    if (mask.empty()) throw Error(ErrorKind::kGeometry, where + ": empty mask in " + rel);
    const auto [it, inserted] = image_index.emplace(image_id, out.descriptor.images.size());
    if (inserted) {
      out.descriptor.images.push_back({image_id, mask.width(), mask.height(), rel});
    } else {
      const ImageInfo& img = out.descriptor.images[it->second];
      if (img.width != mask.width() || img.height != mask.height()) {
        throw Error(ErrorKind::kShape, where + ": " + rel + " differs in size from other masks of image " +
                                           std::to_string(image_id));
      }
    }
    categories.insert(inst.category_id);
    inst.geometry = rle_encode(mask);
    out.instances.push_back(std::move(inst));
  }
  for (const auto id : categories) out.descriptor.categories.push_back({id, ""});
  return out;
}

std::string write_coco_predictions(const std::vector<PredInstance>& predictions) {
  json out = json::array();
  for (const auto& p : predictions) {
    json seg;
    if (const auto* rle = std::get_if<Rle>(&p.geometry)) {
      seg = {{"size", {rle->height, rle->width}}, {"counts", rle_counts_to_string(rle->counts)}};
    } else {
      seg = json::array();
      for (const Ring& ring : std::get<Polygons>(p.geometry).rings) {
        json flat = json::array();
        for (const auto& v : ring) {
          flat.push_back(v.x());
          flat.push_back(v.y());
        }
        seg.push_back(std::move(flat));
      }
    }
    out.push_back({{"image_id", p.image_id},
                   {"category_id", p.category_id},
                   {"segmentation", std::move(seg)},
                   {"score", p.score}});
  }
  return out.dump();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lareval
