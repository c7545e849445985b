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

#include <cmath>
#include <random>

#include "doctest.h"
#include "lareval/errors.hpp"
#include "lareval/mask_ops.hpp"
#include "lareval/skeleton.hpp"
#include "lareval/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lareval;

namespace {

void check_invariants(const BinaryMask& m) {
  const Skeleton s = skeletonize(m);
  CHECK(s.source_area == m.area());
  CHECK(!oracle::has_2x2_block(s.mask));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (s.mask(x, y)) CHECK(m(x, y));
  CHECK(oracle::components(s.mask, true) == oracle::components(m, true));
  CHECK(skeletonize(s.mask).mask == s.mask);
}

BinaryMask path_mask(int w, int h, const std::vector<Point2i>& pts) {
  BinaryMask m(w, h);
  for (const auto& p : pts) m.set(p.x(), p.y());
  return m;
}

double chain_length(const std::vector<Point2i>& path) {
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Point2i d = (path[k] - path[k - 1]).cwiseAbs();
    total += (d.x() + d.y() == 2) ? std::sqrt(2.0) : 1.0;
  }
  return total;
}

}  // namespace

TEST_CASE("skeletonize trivial inputs") {
  BinaryMask one(5, 5);
  one.set(2, 2);
  CHECK(skeletonize(one).mask == one);
  CHECK(skeletonize(BinaryMask(4, 4)).mask.empty());
  BinaryMask full(1, 1);
  full.set(0, 0);
  CHECK(skeletonize(full).mask == full);
}

TEST_CASE("skeletonize a 3x101 bar") {
  const auto bar = testutil::rect(110, 9, 4, 3, 105, 6);
  const Skeleton s = skeletonize(bar);
  check_invariants(bar);
  CHECK(count_components(s.mask) == 1);
  CHECK(s.mask.area() >= 95);
  CHECK(s.mask.area() <= 105);
  // a 1-px wide horizontal path: at most one pixel per column
  for (int x = 0; x < 110; ++x) {
    int n = 0;
    for (int y = 0; y < 9; ++y) n += s.mask(x, y);
    CHECK(n <= 1);
  }
}

TEST_CASE("skeleton invariants on random shapes") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 150; ++k) check_invariants(testutil::random_blobs(rng, 48, 40));
  for (int k = 0; k < 50; ++k) check_invariants(testutil::random_mask(rng, 24, 24, 0.55));
  // shapes touching the canvas border
  check_invariants(testutil::rect(12, 12, 0, 0, 12, 12));
  check_invariants(testutil::rect(12, 7, 0, 0, 12, 4));
}

TEST_CASE("skeletonize is deterministic and translation invariant") {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 30; ++k) {
    BinaryMask m(60, 60);
    testutil::draw_segment(m, 10, 10, 40, 35, 2.5);
    testutil::draw_segment(m, 40, 35, 45, 12, 2.0);
    const int dx = static_cast<int>(rng() % 9), dy = static_cast<int>(rng() % 9);
    const Skeleton a = skeletonize(m), b = skeletonize(translate(m, dx, dy));
    CHECK(translate(a.mask, dx, dy) == b.mask);
    for (const LengthEstimator e : {LengthEstimator{PixelCount{}}, LengthEstimator{GeodesicChain{}},
                                    LengthEstimator{PolylineFit{}}}) {
      CHECK(skeleton_length(a, e) == skeleton_length(b, e));
    }
  }
}

TEST_CASE("length estimators on straight paths") {
  std::vector<Point2i> h, d;
  for (int k = 0; k < 100; ++k) {
    h.emplace_back(k + 2, 3);
    d.emplace_back(k + 2, k + 2);
  }
  const Skeleton sh{path_mask(110, 8, h), 100};
  CHECK(skeleton_length(sh, PixelCount{}) == 100);
  CHECK(skeleton_length(sh, GeodesicChain{}) == doctest::Approx(99.0).epsilon(1e-12));
  CHECK(skeleton_length(sh, PolylineFit{}) == doctest::Approx(99.0).epsilon(1e-12));
  const Skeleton sd{path_mask(110, 110, d), 100};
  CHECK(skeleton_length(sd, GeodesicChain{}) == doctest::Approx(99.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(skeleton_length(sd, PolylineFit{}) == doctest::Approx(99.0 * std::sqrt(2.0)).epsilon(1e-12));

  BinaryMask one(3, 3);
  one.set(1, 1);
  const Skeleton s1{one, 1};
  CHECK(skeleton_length(s1, PixelCount{}) == 1);
  CHECK(skeleton_length(s1, GeodesicChain{}) == 0);
  CHECK(skeleton_length(s1, PolylineFit{}) == 0);
  const Skeleton s0{BinaryMask(3, 3), 0};
  CHECK(skeleton_length(s0, PixelCount{}) == 0);
  CHECK(skeleton_length(s0, GeodesicChain{}) == 0);
  CHECK(skeleton_length(s0, PolylineFit{}) == 0);
}

TEST_CASE("geodesic diameter matches all-pairs shortest paths") {
  std::mt19937_64 rng(35);
  for (int k = 0; k < 40; ++k) {
    BinaryMask m = testutil::random_blobs(rng, 26, 26);
    const Skeleton s = skeletonize(m);
    const auto parts = connected_components(s.mask);
    if (parts.empty()) continue;
    const double expect = oracle::floyd_diameter(parts.front());
    CHECK(skeleton_length(s, GeodesicChain{}) == doctest::Approx(expect).epsilon(1e-12));
    const auto path = trace_diameter_path(s);
    CHECK(chain_length(path) == doctest::Approx(expect).epsilon(1e-12));
    for (std::size_t i = 1; i < path.size(); ++i) {
      const Point2i d = (path[i] - path[i - 1]).cwiseAbs();
      CHECK(d.maxCoeff() == 1);
    }
    // bounded by the weighted edge count of the component
    CHECK(skeleton_length(s, GeodesicChain{}) <= skeleton_length(s, PixelCount{}) * std::sqrt(2.0));
  }
}

TEST_CASE("trace_diameter_path") {
  std::vector<Point2i> line;
  for (int k = 0; k < 20; ++k) line.emplace_back(k + 1, 4);
  const auto path = trace_diameter_path({path_mask(30, 9, line), 20});
  CHECK(path == line);

  BinaryMask one(3, 3);
  one.set(2, 0);
  CHECK(trace_diameter_path({one, 1}) == std::vector<Point2i>{Point2i(2, 0)});
  CHECK_THROWS_AS(trace_diameter_path({BinaryMask(3, 3), 0}), Error);

  // T: arms of 30 px either side of the junction, stem of 50 px downwards
  BinaryMask t(80, 70);
  for (int x = 10; x <= 70; ++x) t.set(x, 5);
  for (int y = 6; y <= 55; ++y) t.set(40, y);
  const auto tp = trace_diameter_path({t, t.area()});
  const double apsp = oracle::floyd_diameter(t);
  CHECK(chain_length(tp) == doctest::Approx(apsp));
  // arm + diagonal shortcut into the stem + stem
  CHECK(chain_length(tp) == doctest::Approx(29.0 + std::sqrt(2.0) + 49.0));
  const bool stem_end = tp.front() == Point2i(40, 55) || tp.back() == Point2i(40, 55);
  CHECK(stem_end);

  // stem shorter than an arm: the path runs along the arms
  BinaryMask t2(80, 30);
  for (int x = 10; x <= 70; ++x) t2.set(x, 5);
  for (int y = 6; y <= 20; ++y) t2.set(40, y);
  const auto tp2 = trace_diameter_path({t2, t2.area()});
  CHECK(chain_length(tp2) == doctest::Approx(60.0));
  CHECK(tp2.front() == Point2i(10, 5));
  CHECK(tp2.back() == Point2i(70, 5));
}

TEST_CASE("longest fragment") {
  const auto bar = testutil::rect(140, 20, 5, 5, 105, 8);
  CHECK(longest_fragment_length(bar, GeodesicChain{}) ==
        skeleton_length(skeletonize(bar), GeodesicChain{}));
  BinaryMask two = bar;
  for (int y = 12; y < 15; ++y)
    for (int x = 20; x < 70; ++x) two.set(x, y);
  const Skeleton s = skeletonize(two);
  const auto lengths = fragment_lengths(s, GeodesicChain{});
  REQUIRE(lengths.size() == 2);
  const double longest = longest_fragment_length(two, GeodesicChain{});
  CHECK(longest == std::max(lengths[0], lengths[1]));
  CHECK(longest == doctest::Approx(99.0).epsilon(0.03));
  CHECK(std::min(lengths[0], lengths[1]) == doctest::Approx(49.0).epsilon(0.05));
  CHECK(longest_fragment_length(BinaryMask(5, 5), GeodesicChain{}) == 0.0);
}

TEST_CASE("estimator selection") {
  CHECK(std::holds_alternative<PixelCount>(make_estimator("pixel")));
  CHECK(std::holds_alternative<GeodesicChain>(make_estimator("geodesic")));
  CHECK(std::get<PolylineFit>(make_estimator("polyline", 2.5)).epsilon == 2.5);
  CHECK_THROWS_AS(make_estimator("spline"), Error);
  CHECK_THROWS_AS(make_estimator("polyline", 0.0), Error);
  CHECK(estimator_name(GeodesicChain{}) == "geodesic");
}

TEST_CASE("simplify_polyline") {
  using V = Vec2<double>;
  std::vector<V> collinear;
  for (int k = 0; k <= 10; ++k) collinear.emplace_back(k, 2 * k);
  auto out = simplify_polyline<double>(collinear, 0.1);
  REQUIRE(out.size() == 2);
  CHECK(out.front() == collinear.front());
  CHECK(out.back() == collinear.back());

  std::vector<V> ell;
  for (int k = 0; k <= 10; ++k) ell.emplace_back(0, k);
  for (int k = 1; k <= 10; ++k) ell.emplace_back(k, 10);
  out = simplify_polyline<double>(ell, 0.5);
  REQUIRE(out.size() == 3);
  CHECK(out[1] == V(0, 10));

  CHECK_THROWS_AS(simplify_polyline<double>(std::vector<V>{V(0, 0)}, 1.0), Error);
  CHECK_THROWS_AS(simplify_polyline<double>(ell, 0.0), Error);

  SUBCASE("every input point stays within epsilon") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> step(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
      std::vector<V> walk{V(0, 0)};
      for (int i = 0; i < 80; ++i) walk.push_back(walk.back() + V(step(rng), step(rng)));
      const double eps = 0.5 + (k % 5);
      const auto simp = simplify_polyline<double>(walk, eps);
      for (const auto& p : walk) {
        double best = 1e300;
        for (std::size_t i = 1; i < simp.size(); ++i)
          best = std::min(best, segment_distance<double>(p, simp[i - 1], simp[i]));
        CHECK(best <= eps + 1e-12);
      }
    }
  }
  SUBCASE("noisy sine keeps its length") {
    // y = 10 sin(x / 15) for x in [0, 200], sampled per pixel and rounded
    std::vector<V> noisy;
    for (int x = 0; x <= 200; ++x) noisy.emplace_back(x, std::round(10 * std::sin(x / 15.0)));
    double exact = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double a = 200.0 * i / n, b = 200.0 * (i + 1) / n;
      exact += std::hypot(b - a, 10 * (std::sin(b / 15.0) - std::sin(a / 15.0)));
    }
    const auto simp = simplify_polyline<double>(noisy, 1.5);
    CHECK(std::abs(polyline_length<double>(simp) - exact) / exact < 0.05);
  }
}

TEST_CASE("synthetic curves: estimator accuracy") {
  // PolylineFit tracks the analytic length closely; GeodesicChain carries the
  // usual chain-code overestimate on oblique runs
  double worst_poly = 0.0, worst_geo = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CurveSpec c = random_curve(seed, 400, 400, 3 + 2 * static_cast<int>(seed % 3), 200.0);
    const double truth = analytic_length(c);
    const Skeleton s = skeletonize(render_curve(c));
    worst_poly = std::max(worst_poly, std::abs(skeleton_length(s, PolylineFit{}) - truth) / truth);
    worst_geo = std::max(worst_geo, std::abs(skeleton_length(s, GeodesicChain{}) - truth) / truth);
  }
  CHECK(worst_poly < 0.05);
  CHECK(worst_geo < 0.12);
}
