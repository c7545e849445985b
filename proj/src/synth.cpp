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

#include "lareval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "lareval/errors.hpp"
#include "lareval/mask_ops.hpp"
#include "lareval/skeleton.hpp"

namespace lareval {
namespace {

constexpr int kMaxPlacementAttempts = 1000;
constexpr double kMaxSceneIou = 0.3;

class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Bezier {
  Point2d p0, p1, p2;
  Point2d at(double t) const {
    const double s = 1.0 - t;
    return s * s * p0 + 2.0 * s * t * p1 + t * t * p2;
  }
};

std::vector<Bezier> segments_of(const CurveSpec& curve) {
  const auto& c = curve.control_points;
  if (c.size() < 3) throw Error(ErrorKind::kGeometry, "a curve needs at least 3 control points");
  std::vector<Bezier> out;
  const std::size_t n = c.size();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const Point2d start = k == 0 ? c[0] : Point2d(0.5 * (c[k] + c[k + 1]));
    const Point2d end = k + 3 == n ? c[n - 1] : Point2d(0.5 * (c[k + 1] + c[k + 2]));
    out.push_back({start, c[k + 1], end});
  }
  return out;
}

double sampled_length(const std::vector<Bezier>& segments, int samples_per_segment) {
  double total = 0.0;
  for (const auto& seg : segments) {
    Point2d prev = seg.p0;
    for (int k = 1; k <= samples_per_segment; ++k) {
      const Point2d p = seg.at(static_cast<double>(k) / samples_per_segment);
      total += (p - prev).norm();
      prev = p;
    }
  }
  return total;
}

// Polyline through the curve with roughly quarter-pixel spacing, plus the
// cumulative arc length at every vertex.
struct DenseCurve {
  std::vector<Point2d> points;
  std::vector<double> arc;
};

DenseCurve densify(const CurveSpec& curve) {
  DenseCurve d;
  const auto segments = segments_of(curve);
  d.points.push_back(segments.front().p0);
  d.arc.push_back(0.0);
  for (const auto& seg : segments) {
    const double chord = (seg.p1 - seg.p0).norm() + (seg.p2 - seg.p1).norm();
    const int n = std::max(8, static_cast<int>(std::ceil(chord * 4.0)));
    for (int k = 1; k <= n; ++k) {
      const Point2d p = seg.at(static_cast<double>(k) / n);
      d.arc.push_back(d.arc.back() + (p - d.points.back()).norm());
      d.points.push_back(p);
    }
  }
  return d;
}

std::size_t segment_at(const DenseCurve& d, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::kRange, "arc-length fraction must lie in [0, 1]");
  }
  const double target = fraction * d.arc.back();
  const auto it = std::lower_bound(d.arc.begin(), d.arc.end(), target);
  const auto k = static_cast<std::size_t>(std::distance(d.arc.begin(), it));
  return std::clamp<std::size_t>(k, 1, d.points.size() - 1);
}

struct Bounds {
  Point2d lo;
  Point2d hi;
};

Bounds bounds_of(const DenseCurve& d) {
  Bounds b{d.points.front(), d.points.front()};
  for (const auto& p : d.points) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

std::optional<CurveSpec> try_random_curve(std::uint64_t seed, int canvas_width,
                                          int canvas_height, int width, double target_length,
                                          double max_turn_degrees) {
  Random rng(seed);
  const int legs = rng.integer(3, 5);
  const double max_turn = max_turn_degrees * std::numbers::pi / 180.0;
  double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  CurveSpec curve;
  curve.width = width;
  curve.canvas_width = canvas_width;
  curve.canvas_height = canvas_height;
  curve.seed = seed;
  curve.control_points.emplace_back(0.0, 0.0);
  for (int k = 0; k < legs; ++k) {
    if (k > 0) heading += rng.uniform(-max_turn, max_turn);
    const double leg = rng.uniform(0.7, 1.3);
    curve.control_points.push_back(curve.control_points.back() +
                                   leg * Point2d(std::cos(heading), std::sin(heading)));
  }
  const double scale = target_length / analytic_length(curve);
  for (auto& p : curve.control_points) p *= scale;

  const Bounds b = bounds_of(densify(curve));
  const double margin = width;
  const double x_lo = margin - b.lo.x();
  const double x_hi = canvas_width - margin - b.hi.x();
  const double y_lo = margin - b.lo.y();
  const double y_hi = canvas_height - margin - b.hi.y();
  if (x_hi < x_lo || y_hi < y_lo) return std::nullopt;
  const Point2d offset(rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi));
  for (auto& p : curve.control_points) p += offset;
  return curve;
}

}  // namespace

double analytic_length(const CurveSpec& curve) {
  const auto segments = segments_of(curve);
  int samples = 16;
  double previous = sampled_length(segments, samples);
  for (;;) {
    samples *= 2;
    const double current = sampled_length(segments, samples);
    if (std::abs(current - previous) <= 1e-4 * current || samples > (1 << 20)) return current;
    previous = current;
  }
}

Point2d point_at_fraction(const CurveSpec& curve, double fraction) {
  const DenseCurve d = densify(curve);
  const std::size_t k = segment_at(d, fraction);
  const double span = d.arc[k] - d.arc[k - 1];
  const double t = span > 0.0 ? (fraction * d.arc.back() - d.arc[k - 1]) / span : 0.0;
  return d.points[k - 1] + std::clamp(t, 0.0, 1.0) * (d.points[k] - d.points[k - 1]);
}

Point2d tangent_at_fraction(const CurveSpec& curve, double fraction) {
  const DenseCurve d = densify(curve);
  const std::size_t k = segment_at(d, fraction);
  return (d.points[k] - d.points[k - 1]).normalized();
}

BinaryMask render_curve(const CurveSpec& curve) {
  BinaryMask mask(curve.canvas_width, curve.canvas_height);
  const DenseCurve d = densify(curve);
  const double radius = 0.5 * curve.width;
  for (std::size_t k = 1; k < d.points.size(); ++k) {
    const Point2d& a = d.points[k - 1];
    const Point2d& b = d.points[k];
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - radius - 1)));
    const int x1 = std::min(mask.width() - 1,
                            static_cast<int>(std::ceil(std::max(a.x(), b.x()) + radius + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - radius - 1)));
    const int y1 = std::min(mask.height() - 1,
                            static_cast<int>(std::ceil(std::max(a.y(), b.y()) + radius + 1)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (mask(x, y)) continue;
        if (segment_distance<double>(Point2d(x + 0.5, y + 0.5), a, b) <= radius) mask.set(x, y);
      }
    }
  }
  return mask;
}

CurveSpec random_curve(std::uint64_t seed, int canvas_width, int canvas_height, int width,
                       double target_length, double max_turn_degrees) {
  auto curve = try_random_curve(seed, canvas_width, canvas_height, width, target_length,
                                max_turn_degrees);
  if (!curve) throw Error(ErrorKind::kPlacement, "curve does not fit the canvas");
  return *curve;
}

Scene generate_scene(std::uint64_t seed, const SceneParams& params) {
  if (params.n_instances < 0) throw Error(ErrorKind::kRange, "instance count must be >= 0");
  if (params.min_width < 1 || params.max_width < params.min_width ||
      !(params.min_length > 0.0) || params.max_length < params.min_length) {
    throw Error(ErrorKind::kRange, "empty width or length range");
  }
  std::vector<int> widths;
  for (int w = params.min_width; w <= params.max_width; ++w) {
    if (w % 2 == 1) widths.push_back(w);
  }
  if (widths.empty()) throw Error(ErrorKind::kRange, "width range holds no odd width");

  Scene scene;
  scene.image = {params.image_id, params.canvas_width, params.canvas_height,
                 "synth_" + std::to_string(params.image_id) + ".png"};
  Random rng(seed);
  std::vector<PixelBox> boxes;
  std::vector<std::int64_t> areas;
  int attempts = 0;
  while (static_cast<int>(scene.instances.size()) < params.n_instances) {
    if (attempts++ >= kMaxPlacementAttempts) {
      throw Error(ErrorKind::kPlacement,
                  "could not place " + std::to_string(params.n_instances) + " instances on a " +
                      std::to_string(params.canvas_width) + "x" +
                      std::to_string(params.canvas_height) + " canvas after " +
                      std::to_string(kMaxPlacementAttempts) + " attempts");
    }
    const int width = widths[static_cast<std::size_t>(rng.integer(0, static_cast<int>(widths.size()) - 1))];
    const double length = rng.uniform(params.min_length, params.max_length);
    const std::uint64_t curve_seed = mix_seed(seed, rng.next());
    auto curve = try_random_curve(curve_seed, params.canvas_width, params.canvas_height, width,
                                  length, params.max_turn_degrees);
    if (!curve) continue;
    BinaryMask mask = render_curve(*curve);
    const auto box = try_bounding_box(mask);
    if (!box) continue;
    const std::int64_t area = mask.area();
    bool overlaps = false;
    for (std::size_t k = 0; k < scene.instances.size() && !overlaps; ++k) {
      const std::int64_t inter = intersection_area(mask, *box, scene.instances[k].mask, boxes[k]);
      overlaps = static_cast<double>(inter) / static_cast<double>(area + areas[k] - inter) >= kMaxSceneIou;
    }
    if (overlaps) continue;
    SynthInstance inst;
    inst.gt.annotation_id = params.first_annotation_id + static_cast<std::int64_t>(scene.instances.size());
    inst.gt.image_id = params.image_id;
    inst.gt.category_id = 1;
    inst.gt.geometry = rle_encode(mask);
    inst.length = analytic_length(*curve);
    inst.curve = std::move(*curve);
    inst.mask = std::move(mask);
    boxes.push_back(*box);
    areas.push_back(area);
    scene.instances.push_back(std::move(inst));
  }
  return scene;
}

PerturbationSpec parse_perturbation(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  const auto bad = [&] {
    return Error(ErrorKind::kRange, "invalid perturbation '" + text + "'");
  };
  if (parts.empty()) throw bad();
  const auto number = [&](std::size_t k) {
    if (k >= parts.size()) throw bad();
    try {
      std::size_t used = 0;
      const double v = std::stod(parts[k], &used);
      if (used != parts[k].size()) throw bad();
      return v;
    } catch (const std::logic_error&) {
      throw bad();
    }
  };
  const std::string& kind = parts[0];
  PerturbationSpec spec;
  std::size_t expected = 1;
  if (kind == "none") {
    spec = Shift{0, 0};
  } else if (kind == "drop") {
    spec = Drop{};
  } else if (kind == "erode") {
    spec = Erode{static_cast<int>(number(1))};
    expected = 2;
  } else if (kind == "dilate") {
    spec = Dilate{static_cast<int>(number(1))};
    expected = 2;
  } else if (kind == "fracture") {
    spec = Fracture{number(1), number(2)};
    expected = 3;
  } else if (kind == "shift") {
    spec = Shift{static_cast<int>(number(1)), static_cast<int>(number(2))};
    expected = 3;
  } else if (kind == "duplicate") {
    spec = Duplicate{number(1)};
    expected = 2;
  } else {
    throw bad();
  }
  if (parts.size() != expected) throw bad();
  if (const auto* e = std::get_if<Erode>(&spec); e && e->radius < 0) throw bad();
  if (const auto* d = std::get_if<Dilate>(&spec); d && d->radius < 0) throw bad();
  if (const auto* f = std::get_if<Fracture>(&spec);
      f && (f->gap_px < 0.0 || !(f->position_fraction > 0.0 && f->position_fraction < 1.0))) {
    throw bad();
  }
  if (const auto* d = std::get_if<Duplicate>(&spec); d && d->score_delta < 0.0) throw bad();
  return spec;
}

PerturbResult perturb(const SynthInstance& instance, const PerturbationSpec& spec,
                      std::uint64_t /*seed*/) {
  PerturbResult result;
  const auto emit = [&](const BinaryMask& mask, double score) {
    PredInstance p;
    p.image_id = instance.gt.image_id;
    p.category_id = instance.gt.category_id;
    p.geometry = rle_encode(mask);
    p.score = score;
    result.predictions.push_back(std::move(p));
  };
  const auto emit_nonempty = [&](const BinaryMask& mask, const char* what) {
    if (mask.empty()) {
      result.diagnostic = std::string(what) + " emptied annotation " +
                          std::to_string(instance.gt.annotation_id) + "; prediction omitted";
      return;
    }
    emit(mask, 1.0);
  };

  if (const auto* e = std::get_if<Erode>(&spec)) {
    emit_nonempty(erode(instance.mask, e->radius), "erosion");
  } else if (const auto* d = std::get_if<Dilate>(&spec)) {
    emit(dilate(instance.mask, d->radius), 1.0);
  } else if (const auto* f = std::get_if<Fracture>(&spec)) {
    if (!(f->position_fraction > 0.0 && f->position_fraction < 1.0) || f->gap_px < 0.0) {
      throw Error(ErrorKind::kRange, "fracture position must lie in (0, 1) and gap must be >= 0");
    }
    const Point2d centre = point_at_fraction(instance.curve, f->position_fraction);
    const Point2d tangent = tangent_at_fraction(instance.curve, f->position_fraction);
    BinaryMask mask = instance.mask;
    const double reach = f->gap_px + instance.curve.width;
    for (int y = std::max(0, static_cast<int>(centre.y() - reach));
         y <= std::min(mask.height() - 1, static_cast<int>(centre.y() + reach)); ++y) {
      for (int x = std::max(0, static_cast<int>(centre.x() - reach));
           x <= std::min(mask.width() - 1, static_cast<int>(centre.x() + reach)); ++x) {
        const Point2d rel = Point2d(x + 0.5, y + 0.5) - centre;
        const double along = rel.dot(tangent);
        const double across = std::abs(rel.x() * tangent.y() - rel.y() * tangent.x());
        if (along >= -0.5 * f->gap_px && along < 0.5 * f->gap_px &&
            across <= instance.curve.width) {
          mask.set(x, y, false);
        }
      }
    }
    emit_nonempty(mask, "fracture");
  } else if (const auto* s = std::get_if<Shift>(&spec)) {
    emit_nonempty(translate(instance.mask, s->dx, s->dy), "shift");
  } else if (std::holds_alternative<Drop>(spec)) {
    // nothing
  } else if (const auto* dup = std::get_if<Duplicate>(&spec)) {
    emit(instance.mask, 1.0);
    emit(instance.mask, std::max(0.0, 1.0 - dup->score_delta));
  }
  return result;
}

std::string write_coco_ground_truth(const std::vector<Scene>& scenes) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["images"] = ordered_json::array();
  doc["annotations"] = ordered_json::array();
  for (const auto& scene : scenes) {
    doc["images"].push_back({{"id", scene.image.image_id},
                             {"width", scene.image.width},
                             {"height", scene.image.height},
                             {"file_name", scene.image.file_name}});
    for (const auto& inst : scene.instances) {
      const Rle& rle = std::get<Rle>(inst.gt.geometry);
      const PixelBox box = bounding_box(inst.mask);
      doc["annotations"].push_back(
          {{"id", inst.gt.annotation_id},
           {"image_id", inst.gt.image_id},
           {"category_id", inst.gt.category_id},
           {"segmentation",
            {{"size", {rle.height, rle.width}}, {"counts", rle_counts_to_string(rle.counts)}}},
           {"area", rle_area(rle)},
           {"bbox", {box.x_min, box.y_min, box.width(), box.height()}},
           {"iscrowd", 0},
           {"length", inst.length}});
    }
  }
  doc["categories"] = ordered_json::array({{{"id", 1}, {"name", "dislocation"}}});
  return doc.dump();
}

}  // namespace lareval
