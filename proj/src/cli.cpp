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

#include "lareval/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "lareval/annotation_io.hpp"
#include "lareval/errors.hpp"
#include "lareval/mask_ops.hpp"
#include "lareval/metrics.hpp"
#include "lareval/png_io.hpp"
#include "lareval/report.hpp"
#include "lareval/skeleton.hpp"
#include "lareval/synth.hpp"

namespace lareval {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct GroundTruth {
  DatasetDescriptor descriptor;
  std::vector<GtInstance> instances;
};

struct Loaded {
  GroundTruth gt;
  std::vector<PredInstance> preds;
  std::vector<std::string> diagnostics;
};

std::pair<int, int> parse_image_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    const int w = std::stoi(text.substr(0, x));
    const int h = std::stoi(text.substr(x + 1));
    if (w < 1 || h < 1) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::kRange, "--image-size must look like WIDTHxHEIGHT, got '" + text + "'");
  }
}

std::vector<fs::path> label_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

GroundTruth load_ground_truth(const std::string& format, const fs::path& path,
                              const std::string& image_size) {
  if (format == "coco") {
    auto parsed = parse_coco_ground_truth(read_text_file(path));
    return {std::move(parsed.descriptor), std::move(parsed.instances)};
  }
  if (format == "raster-manifest") {
    auto manifest = load_raster_manifest(path);
    GroundTruth gt{std::move(manifest.descriptor), {}};
    std::int64_t next_id = 1;
    for (auto& inst : manifest.instances) {
      gt.instances.push_back({next_id++, inst.image_id, inst.category_id, std::move(inst.geometry)});
    }
    return gt;
  }
  if (format == "yolo") {
    if (image_size.empty()) throw Error(ErrorKind::kSchema, "--image-size is required for yolo input");
    const auto [w, h] = parse_image_size(image_size);
    GroundTruth gt;
    std::set<std::int64_t> classes;
    std::int64_t image_id = 1;
    std::int64_t next_id = 1;
    for (const auto& file : label_files(path)) {
      gt.descriptor.images.push_back({image_id, w, h, file.stem().string()});
      auto parsed = parse_yolo_segmentation(read_text_file(file), w, h, false);
      for (auto& inst : parsed.instances) {
        GtInstance g{next_id++, image_id, inst.class_id, std::move(inst.geometry)};
        if (geometry_area(g.geometry, w, h) < 1) {
          throw Error(ErrorKind::kGeometry, file.string() + ": instance with empty geometry");
        }
        classes.insert(inst.class_id);
        gt.instances.push_back(std::move(g));
      }
      ++image_id;
    }
    for (const auto c : classes) gt.descriptor.categories.push_back({c, ""});
    return gt;
  }
  throw Error(ErrorKind::kRange, "unknown format '" + format + "'");
}

Loaded load_dataset(const std::string& format, const fs::path& gt_path, const fs::path& pred_path,
                    const std::string& image_size) {
  Loaded data;
  data.gt = load_ground_truth(format, gt_path, image_size);
  if (format == "coco") {
    auto preds = parse_coco_predictions(read_text_file(pred_path), data.gt.descriptor);
    data.preds = std::move(preds.instances);
    data.diagnostics = std::move(preds.diagnostics);
  } else if (format == "raster-manifest") {
    auto manifest = load_raster_manifest(pred_path);
    for (const auto& img : manifest.descriptor.images) {
      const ImageInfo* known = data.gt.descriptor.find_image(img.image_id);
      if (!known) {
        throw Error(ErrorKind::kReference,
                    "prediction manifest references unknown image_id " + std::to_string(img.image_id));
      }
      if (known->width != img.width || known->height != img.height) {
        throw Error(ErrorKind::kShape, "prediction masks of image " + std::to_string(img.image_id) +
                                           " differ in size from the ground truth");
      }
    }
    data.preds = std::move(manifest.instances);
  } else {
    const auto [w, h] = parse_image_size(image_size);
    std::map<std::string, std::int64_t> ids;
    for (const auto& img : data.gt.descriptor.images) ids.emplace(img.file_name, img.image_id);
    for (const auto& file : label_files(pred_path)) {
      const auto it = ids.find(file.stem().string());
      if (it == ids.end()) {
        throw Error(ErrorKind::kReference,
                    file.string() + " has no ground-truth label file with the same name");
      }
      auto parsed = parse_yolo_segmentation(read_text_file(file), w, h, true);
      if (parsed.clamped_coordinates > 0) {
        data.diagnostics.push_back(file.string() + ": " + std::to_string(parsed.clamped_coordinates) +
                                   " coordinates clamped to [0, 1]");
      }
      for (auto& inst : parsed.instances) {
        PredInstance p{it->second, inst.class_id, std::move(inst.geometry), inst.score};
        if (geometry_area(p.geometry, w, h) < 1) {
          data.diagnostics.push_back(file.string() + ": empty prediction skipped");
          continue;
        }
        data.preds.push_back(std::move(p));
      }
    }
  }
  return data;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::kIo, "cannot write " + path);
  file << content;
  if (!file) throw Error(ErrorKind::kIo, "failed writing " + path);
}

template <typename T>
void require_file(const T& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "input path does not exist: " + fs::path(path).string());
}

struct EvaluateOptions {
  std::string gt;
  std::string pred;
  std::string format = "coco";
  std::string image_size;
  double iou_threshold = 0.5;
  std::string estimator = "geodesic";
  double epsilon = 1.5;
  std::string mode = "paper";
  double score_threshold = 0.0;
  std::string out = "-";
  std::string out_format = "json";
  int threads = 0;
};

int do_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  require_file(o.gt);
  require_file(o.pred);
  MatchConfig config;
  config.iou_threshold = o.iou_threshold;
  config.estimator = make_estimator(o.estimator, o.epsilon);
  config.mode = parse_matching_mode(o.mode);
  config.score_threshold = o.score_threshold;
  config.validate();
  const Loaded data = load_dataset(o.format, o.gt, o.pred, o.image_size);
  EvaluationReport report =
      evaluate_dataset(data.gt.descriptor, data.gt.instances, data.preds, config, o.threads);
  report.diagnostics.insert(report.diagnostics.begin(), data.diagnostics.begin(),
                            data.diagnostics.end());
  for (const auto& d : report.diagnostics) err << "warning: " << d << '\n';
  write_output(o.out, o.out_format == "csv" ? report_to_csv(report) : report_to_json(report, utc_timestamp()),
               out);
  return 0;
}

struct SkeletonizeOptions {
  std::string in;
  std::string out;
  std::string json = "-";
  double epsilon = 1.5;
};

int do_skeletonize(const SkeletonizeOptions& o, std::ostream& out) {
  require_file(o.in);
  const BinaryMask mask = read_png_mask(o.in);
  const Skeleton skel = skeletonize(mask);
  if (!o.out.empty()) write_png_mask(o.out, skel.mask);
  ordered_json rec;
  rec["pixel_count"] = skeleton_length(skel, PixelCount{});
  rec["geodesic_length"] = skeleton_length(skel, GeodesicChain{});
  rec["polyline_length"] = skeleton_length(skel, PolylineFit{o.epsilon});
  ordered_json path = ordered_json::array();
  if (!skel.mask.empty()) {
    for (const auto& p : trace_diameter_path(skel)) path.push_back({p.x(), p.y()});
  }
  rec["diameter_path"] = std::move(path);
  write_output(o.json, rec.dump() + "\n", out);
  return 0;
}

struct NmsOptions {
  std::string gt;
  std::string pred;
  double threshold = 0.5;
  std::string level = "mask";
  std::string out = "-";
};

int do_nms(const NmsOptions& o, std::ostream& out, std::ostream& err) {
  require_file(o.gt);
  require_file(o.pred);
  const auto gt = parse_coco_ground_truth(read_text_file(o.gt));
  auto preds = parse_coco_predictions(read_text_file(o.pred), gt.descriptor);
  for (const auto& d : preds.diagnostics) err << "warning: " << d << '\n';
  if (!(o.threshold >= 0.0 && o.threshold <= 1.0)) {
    throw Error(ErrorKind::kRange, "--threshold must lie in [0, 1]");
  }
  const IouKind level = o.level == "box" ? IouKind::kBox : IouKind::kMask;
  std::vector<PredInstance> kept;
  for (const auto& img : gt.descriptor.images) {
    std::map<std::int64_t, std::vector<const PredInstance*>> by_category;
    for (const auto& p : preds.instances) {
      if (p.image_id == img.image_id) by_category[p.category_id].push_back(&p);
    }
    for (const auto& [category, group] : by_category) {
      std::vector<BinaryMask> masks;
      std::vector<double> scores;
      for (const auto* p : group) {
        masks.push_back(rasterize(p->geometry, img.width, img.height));
        scores.push_back(p->score);
      }
      for (const std::size_t k : mask_nms(masks, scores, o.threshold, level)) {
        PredInstance p = *group[k];
        p.geometry = rle_encode(masks[k]);
        kept.push_back(std::move(p));
      }
    }
  }
  err << "nms: kept " << kept.size() << " of " << preds.instances.size() << " predictions\n";
  write_output(o.out, write_coco_predictions(kept) + "\n", out);
  return 0;
}

struct SynthOptions {
  std::uint64_t seed = 0;
  int images = 1;
  int instances = 5;
  int width = 512;
  int height = 512;
  int min_stroke = 3;
  int max_stroke = 7;
  double min_length = 80.0;
  double max_length = 200.0;
  std::string perturbation = "none";
  double perturb_probability = 1.0;
  std::string out_dir;
  bool png = false;
};

int do_synth(const SynthOptions& o, std::ostream& err) {
  if (o.images < 0) throw Error(ErrorKind::kRange, "--images must be >= 0");
  if (!(o.perturb_probability >= 0.0 && o.perturb_probability <= 1.0)) {
    throw Error(ErrorKind::kRange, "--perturb-prob must lie in [0, 1]");
  }
  const PerturbationSpec spec = parse_perturbation(o.perturbation);
  fs::create_directories(o.out_dir);
  std::vector<Scene> scenes;
  std::vector<PredInstance> preds;
  std::mt19937_64 chooser(o.seed ^ 0x5bd1e995ULL);
  std::int64_t next_annotation = 1;
  for (int k = 0; k < o.images; ++k) {
    SceneParams params;
    params.n_instances = o.instances;
    params.canvas_width = o.width;
    params.canvas_height = o.height;
    params.min_width = o.min_stroke;
    params.max_width = o.max_stroke;
    params.min_length = o.min_length;
    params.max_length = o.max_length;
    params.image_id = k + 1;
    params.first_annotation_id = next_annotation;
    Scene scene = generate_scene(o.seed + static_cast<std::uint64_t>(k), params);
    next_annotation += static_cast<std::int64_t>(scene.instances.size());
    for (const auto& inst : scene.instances) {
      const double u = static_cast<double>(chooser() >> 11) * 0x1.0p-53;
      const PerturbationSpec applied = u < o.perturb_probability ? spec : PerturbationSpec{Shift{0, 0}};
      auto result = perturb(inst, applied, o.seed);
      if (result.diagnostic) err << "warning: " << *result.diagnostic << '\n';
      for (auto& p : result.predictions) preds.push_back(std::move(p));
    }
    if (o.png) {
      BinaryMask all(o.width, o.height);
      for (const auto& inst : scene.instances) {
        for (std::int64_t i = 0; i < all.pixel_count(); ++i) all.data()[i] |= inst.mask.data()[i];
      }
      write_png_mask(fs::path(o.out_dir) / scene.image.file_name, all);
    }
    scenes.push_back(std::move(scene));
  }
  write_output((fs::path(o.out_dir) / "gt.json").string(), write_coco_ground_truth(scenes) + "\n",
               std::cout);
  write_output((fs::path(o.out_dir) / "pred.json").string(), write_coco_predictions(preds) + "\n",
               std::cout);
  return 0;
}

struct LengthsOptions {
  std::string gt;
  std::string format = "coco";
  std::string image_size;
  double epsilon = 1.5;
  std::string out = "-";
  std::string out_format = "json";
};

int do_lengths(const LengthsOptions& o, std::ostream& out) {
  require_file(o.gt);
  if (!(o.epsilon > 0.0)) throw Error(ErrorKind::kRange, "--epsilon must be > 0");
  const GroundTruth gt = load_ground_truth(o.format, o.gt, o.image_size);
  ordered_json rows = ordered_json::array();
  std::string csv = "image_id,gt_id,pixel_count,geodesic_length,polyline_length\n";
  for (const auto& inst : gt.instances) {
    const ImageInfo* img = gt.descriptor.find_image(inst.image_id);
    const Skeleton skel = skeletonize(rasterize(inst.geometry, img->width, img->height));
    const double px = skeleton_length(skel, PixelCount{});
    const double geo = skeleton_length(skel, GeodesicChain{});
    const double poly = skeleton_length(skel, PolylineFit{o.epsilon});
    rows.push_back({{"image_id", inst.image_id},
                    {"gt_id", inst.annotation_id},
                    {"pixel_count", px},
                    {"geodesic_length", geo},
                    {"polyline_length", poly}});
    char buf[160];
    std::snprintf(buf, sizeof buf, "%lld,%lld,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(inst.image_id), static_cast<long long>(inst.annotation_id),
                  px, geo, poly);
    csv += buf;
  }
  write_output(o.out, o.out_format == "csv" ? csv : rows.dump(2) + "\n", out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Length-aware evaluation of curvilinear instance segmentations", "lareval"};
  app.require_subcommand(1);

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Match predictions to ground truth and report LAR and mAP");
  evaluate->add_option("--gt", eval.gt, "Ground-truth file (or label directory for yolo)")->required();
  evaluate->add_option("--pred", eval.pred, "Prediction file (or label directory for yolo)")->required();
  evaluate->add_option("--format", eval.format, "Input format")
      ->check(CLI::IsMember({"coco", "yolo", "raster-manifest"}));
  evaluate->add_option("--image-size", eval.image_size, "WIDTHxHEIGHT of every image (yolo)");
  evaluate->add_option("--iou-thresh", eval.iou_threshold, "LAR matching IoU threshold")
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--estimator", eval.estimator, "Length estimator")
      ->check(CLI::IsMember({"pixel", "geodesic", "polyline"}));
  evaluate->add_option("--epsilon", eval.epsilon, "Douglas-Peucker tolerance for the polyline estimator");
  evaluate->add_option("--mode", eval.mode, "Matching mode")
      ->check(CLI::IsMember({"paper", "strict", "greedy"}));
  evaluate->add_option("--score-thresh", eval.score_threshold, "Drop predictions scoring below this")
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--out", eval.out, "Report path, '-' for stdout");
  evaluate->add_option("--out-format", eval.out_format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
  evaluate->add_option("--threads", eval.threads, "Worker threads, 0 = all cores")
      ->check(CLI::NonNegativeNumber);

  SkeletonizeOptions skel;
  auto* skeletonize_cmd = app.add_subcommand("skeletonize", "Thin a PNG mask and measure it");
  skeletonize_cmd->add_option("--in", skel.in, "Input PNG mask")->required();
  skeletonize_cmd->add_option("--out", skel.out, "Output skeleton PNG");
  skeletonize_cmd->add_option("--json", skel.json, "Length record path, '-' for stdout");
  skeletonize_cmd->add_option("--epsilon", skel.epsilon, "Douglas-Peucker tolerance")
      ->check(CLI::PositiveNumber);

  NmsOptions nms;
  auto* nms_cmd = app.add_subcommand("nms", "Greedy non-maximum suppression of COCO predictions");
  nms_cmd->add_option("--gt", nms.gt, "COCO ground truth (image sizes)")->required();
  nms_cmd->add_option("--pred", nms.pred, "COCO results array")->required();
  nms_cmd->add_option("--threshold", nms.threshold, "Overlap above which a prediction is dropped")
      ->check(CLI::Range(0.0, 1.0));
  nms_cmd->add_option("--level", nms.level, "Overlap measure")->check(CLI::IsMember({"mask", "box"}));
  nms_cmd->add_option("--out", nms.out, "Filtered results path, '-' for stdout");

  SynthOptions syn;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic COCO evaluation fixture");
  synth_cmd->add_option("--seed", syn.seed, "Random seed");
  synth_cmd->add_option("--images", syn.images, "Number of images");
  synth_cmd->add_option("--instances", syn.instances, "Instances per image")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--width", syn.width, "Canvas width")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--height", syn.height, "Canvas height")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--min-stroke", syn.min_stroke, "Smallest stroke width")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--max-stroke", syn.max_stroke, "Largest stroke width")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--min-length", syn.min_length, "Shortest centreline")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--max-length", syn.max_length, "Longest centreline")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--perturb", syn.perturbation,
                        "none | drop | erode:R | dilate:R | fracture:GAP:POS | shift:DX:DY | duplicate:DELTA");
  synth_cmd->add_option("--perturb-prob", syn.perturb_probability, "Fraction of instances perturbed");
  synth_cmd->add_option("--out-dir", syn.out_dir, "Output directory")->required();
  synth_cmd->add_flag("--png", syn.png, "Also write one PNG render per image");

  LengthsOptions len;
  auto* lengths_cmd = app.add_subcommand("lengths", "Skeleton lengths of every ground-truth instance");
  lengths_cmd->add_option("--gt", len.gt, "Ground-truth file")->required();
  lengths_cmd->add_option("--format", len.format, "Input format")
      ->check(CLI::IsMember({"coco", "yolo", "raster-manifest"}));
  lengths_cmd->add_option("--image-size", len.image_size, "WIDTHxHEIGHT (yolo)");
  lengths_cmd->add_option("--epsilon", len.epsilon, "Douglas-Peucker tolerance");
  lengths_cmd->add_option("--out", len.out, "Output path, '-' for stdout");
  lengths_cmd->add_option("--out-format", len.out_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto selected = app.get_subcommands();
    err << (selected.empty() ? app.help() : selected.front()->help());
    return 1;
  }

  try {
    if (evaluate->parsed()) return do_evaluate(eval, out, err);
    if (skeletonize_cmd->parsed()) return do_skeletonize(skel, out);
    if (nms_cmd->parsed()) return do_nms(nms, out, err);
    if (synth_cmd->parsed()) return do_synth(syn, err);
    if (lengths_cmd->parsed()) return do_lengths(len, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace lareval
