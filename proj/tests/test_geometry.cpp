// Copyright 2026 The FracPatch Authors.
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

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fracpatch/geometry.hpp"
#include "oracles.hpp"

using namespace fracpatch;
using namespace fracpatch::geometry;
using Catch::Approx;

namespace {

AntennaLayout table_one_layout() {
  SubstrateSpec sub;  // FR4 defaults, 38.7 x 39 board
  PatchDimensions patch = patch_from_dimensions(19e-3, 19e-3, sub, 7e9);
  FeedSpec feed;      // FL 17.5 mm, FW 3.5 mm, edge feed
  GroundSpec ground;  // Lg 15.5 mm, Gw 3.5 mm
  return build_baseline_layout(sub, patch, feed, ground);
}

std::vector<oracles::OracleRect> to_oracle(const std::vector<Rect>& rects) {
  std::vector<oracles::OracleRect> out;
  for (const auto& r : rects) out.push_back({r.x0, r.y0, r.x1, r.y1});
  return out;
}

}  // namespace

TEST_CASE("baseline Table I layout builds as a single island") {
  const AntennaLayout lay = table_one_layout();
  CHECK(lay.copper_regions.size() == 1);
  CHECK(is_single_island(lay));
  CHECK(copper_area(lay) == Approx(361e-6).epsilon(1e-12));
}

TEST_CASE("the paper's 10 x 10 mm patch variant builds too") {
  SubstrateSpec sub;
  PatchDimensions patch = patch_from_dimensions(10e-3, 10e-3, sub, 7e9);
  FeedSpec feed;
  GroundSpec ground;
  const AntennaLayout lay = build_baseline_layout(sub, patch, feed, ground);
  CHECK(is_single_island(lay));
  CHECK(copper_area(lay) == Approx(100e-6).epsilon(1e-12));
}

TEST_CASE("oversized feed trips the dimension-conflict error") {
  SubstrateSpec sub;
  PatchDimensions patch = patch_from_dimensions(19e-3, 19e-3, sub, 7e9);
  FeedSpec feed;
  feed.feed_width_fw = 40e-3;  // board is 39 mm wide
  GroundSpec ground;
  CHECK_THROWS_AS(build_baseline_layout(sub, patch, feed, ground),
                  dimension_conflict_error);
}

TEST_CASE("patch exceeding the board length is rejected") {
  SubstrateSpec sub;
  PatchDimensions patch = patch_from_dimensions(19e-3, 30e-3, sub, 7e9);
  FeedSpec feed;  // FL 17.5 + 30 > 38.7
  GroundSpec ground;
  CHECK_THROWS_AS(build_baseline_layout(sub, patch, feed, ground),
                  dimension_conflict_error);
}

TEST_CASE("fractal cuts remove exactly 36 mm^2 from the Table I patch") {
  const AntennaLayout base = table_one_layout();
  const AntennaLayout frac = apply_fractal_cuts(base, FractalCutSpec{});
  // Area oracle: brute-force raster count at 0.05 mm (all cut corners are
  // multiples of 0.25 mm on this layout).
  const double oracle = oracles::raster_union_area(to_oracle(frac.copper_regions), 0.05e-3);
  CHECK(copper_area(frac) == Approx(325e-6).epsilon(1e-12));
  CHECK(oracle == Approx(325e-6).epsilon(1e-9));
  CHECK(is_single_island(frac));
}

TEST_CASE("fractal cuts overlapping the feed junction are rejected") {
  const AntennaLayout base = table_one_layout();
  FractalCutSpec cuts;
  cuts.feed_clearance = -0.0;     // valid
  cuts.edge_cut_w1 = 4e-3;
  FractalCutSpec bad = cuts;
  bad.feed_clearance = 0.0;
  // Shrinking the clearance to zero makes the flanking cuts touch but not
  // overlap the feed; overlap needs a negative clearance, which validate()
  // rejects, so force overlap via a wide center cut instead.
  bad.center_cut_w2 = 30e-3;
  CHECK_THROWS_AS(apply_fractal_cuts(base, bad), dimension_conflict_error);
}

TEST_CASE("materialize identity on the all-ones chromosome") {
  const AntennaLayout base = table_one_layout();
  const Chromosome ones = Chromosome::all_ones(19);
  const AntennaLayout lay = materialize(ones, base);
  CHECK(copper_area(lay) == Approx(copper_area(base)).epsilon(1e-12));
  // Rasterized equality at FDTD cell resolution.
  const CopperMask a = rasterize_top_copper(base, 0.5e-3);
  const CopperMask b = rasterize_top_copper(lay, 0.5e-3);
  CHECK(a.cells == b.cells);
}

TEST_CASE("materialize is idempotent in effect") {
  const AntennaLayout base = table_one_layout();
  std::mt19937_64 rng(42);
  Chromosome c = Chromosome::all_ones(19);
  // Remove a few interior pixels that keep the island connected.
  c.set(5, 5, 0);
  c.set(5, 6, 0);
  c.set(10, 12, 0);
  const AntennaLayout l1 = materialize(c, base);
  const AntennaLayout l2 = materialize(c, base);
  REQUIRE(l1.copper_regions.size() == l2.copper_regions.size());
  for (size_t i = 0; i < l1.copper_regions.size(); ++i) {
    CHECK(l1.copper_regions[i].x0 == l2.copper_regions[i].x0);
    CHECK(l1.copper_regions[i].y1 == l2.copper_regions[i].y1);
  }
}

TEST_CASE("pixel-count area property holds for random connected genomes") {
  const AntennaLayout base = table_one_layout();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coin(0, 9);
  const int n = 19;
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 12; ++trial) {
    Chromosome c = Chromosome::all_ones(n);
    for (auto& g : c.genes) g = coin(rng) == 0 ? 0 : 1;  // sparse removals
    AntennaLayout lay;
    try {
      lay = materialize(c, base);
    } catch (const disconnected_island_error&) {
      continue;
    }
    ++tested;
    const double expect = static_cast<double>(c.popcount()) / (n * n) *
                          base.patch.width_w * base.patch.length_l;
    CHECK(copper_area(lay) == Approx(expect).epsilon(1e-9));
  }
  CHECK(tested > 0);
}

TEST_CASE("feed-adjacent row of zeros is a disconnected island") {
  const AntennaLayout base = table_one_layout();
  Chromosome c = Chromosome::all_ones(19);
  for (int col = 0; col < 19; ++col) c.set(0, col, 0);
  CHECK(!c.feed_row_has_copper());
  CHECK_THROWS_AS(materialize(c, base), disconnected_island_error);
}

TEST_CASE("an isolated island far from the feed is rejected") {
  const AntennaLayout base = table_one_layout();
  Chromosome c;
  c.n = 19;
  c.genes.assign(19 * 19, 0);
  // Feed-attached blob at the bottom center...
  for (int r = 0; r < 3; ++r)
    for (int col = 7; col < 12; ++col) c.set(r, col, 1);
  // ...plus a detached pixel in the far corner.
  c.set(18, 18, 1);
  CHECK_THROWS_AS(materialize(c, base), disconnected_island_error);
}

TEST_CASE("empty patch copper area is zero") {
  AntennaLayout lay = table_one_layout();
  lay.copper_regions.clear();
  CHECK(copper_area(lay) == 0.0);
}

TEST_CASE("union area handles overlapping rectangle decompositions") {
  // Same copper set described two ways.
  std::vector<Rect> split = {{0, 0, 1, 2}, {1, 0, 2, 2}};
  std::vector<Rect> overlapping = {{0, 0, 2, 1}, {0, 0, 2, 2}};
  CHECK(detail::union_area(split) == Approx(4.0));
  CHECK(detail::union_area(overlapping) == Approx(4.0));
}

TEST_CASE("rasterized equality identifies equal copper under different decompositions") {
  const AntennaLayout base = table_one_layout();
  Chromosome c = Chromosome::all_ones(19);
  c.set(9, 9, 0);
  const AntennaLayout l1 = materialize(c, base);

  // Build the same copper set as outline-minus-pixel instead of row runs.
  AntennaLayout l2 = base;
  l2.copper_regions = detail::subtract_rects(base.patch_outline(),
                                             {pixel_rect(base, 19, 9, 9)});
  const CopperMask m1 = rasterize_top_copper(l1, 0.5e-3);
  const CopperMask m2 = rasterize_top_copper(l2, 0.5e-3);
  CHECK(m1.cells == m2.cells);
}

TEST_CASE("chromosome hex round-trip and hash stability") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Chromosome c;
    c.n = 7;
    c.genes.resize(49);
    for (auto& g : c.genes) g = static_cast<std::uint8_t>(coin(rng));
    const Chromosome back = Chromosome::from_hex(7, c.to_hex());
    CHECK(back.genes == c.genes);
    CHECK(back.hash() == c.hash());
  }
  // A one-gene flip must change the packed string (and in practice the hash).
  Chromosome a = Chromosome::all_ones(5);
  Chromosome b = a;
  b.set(2, 2, 0);
  CHECK(a.hash() != b.hash());
}

TEST_CASE("layout serialization round-trips through the text document") {
  const AntennaLayout lay = apply_fractal_cuts(table_one_layout(), FractalCutSpec{});
  const TextDoc doc = layout_to_doc(lay);
  const AntennaLayout back = layout_from_doc(TextDoc::parse(doc.serialize(), "mem"));
  CHECK(back.copper_regions.size() == lay.copper_regions.size());
  CHECK(copper_area(back) == Approx(copper_area(lay)).epsilon(1e-9));
  const CopperMask m1 = rasterize_top_copper(lay, 0.25e-3);
  const CopperMask m2 = rasterize_top_copper(back, 0.25e-3);
  CHECK(m1.cells == m2.cells);
  CHECK(back.substrate.eps_r == Approx(lay.substrate.eps_r));
  CHECK(back.ground_regions.size() == lay.ground_regions.size());
}

TEST_CASE("chromosome_from_cuts reproduces the cut pattern approximately") {
  const AntennaLayout base = table_one_layout();
  const Chromosome c = chromosome_from_cuts(base, FractalCutSpec{}, 19);
  CHECK(c.popcount() < 19 * 19);
  CHECK(c.feed_row_has_copper());
  // The genome version of the cuts must still materialize as one island.
  CHECK_NOTHROW(materialize(c, base));
}
