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

#ifndef FRACPATCH_GEOMETRY_HPP
#define FRACPATCH_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "fracpatch/errors.hpp"
#include "fracpatch/microstrip.hpp"
#include "fracpatch/text_doc.hpp"

namespace fracpatch {
namespace geometry {

// Board coordinate system: origin at a substrate corner, x across the board
// width, y along the board length. The feed enters at the y = 0 edge; the
// patch sits beyond the feed line. All lengths in meters.

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool empty() const { return x1 <= x0 || y1 <= y0; }

  bool overlaps(const Rect& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
  bool contains_point(double x, double y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  bool contains_rect(const Rect& o) const {
    return o.x0 >= x0 && o.x1 <= x1 && o.y0 >= y0 && o.y1 <= y1;
  }
  Rect intersect(const Rect& o) const {
    return Rect{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1),
                std::min(y1, o.y1)};
  }
};

struct SubstrateSpec {
  double eps_r = 4.4;          // FR4 default; the paper names the material only
  double loss_tangent = 0.02;  // industry-standard FR4 value, configurable
  double height_h = 1.57e-3;
  double length_sub = 38.7e-3;
  double width_sub = 39.0e-3;

  void validate() const {
    if (!(eps_r > 1.0)) throw invalid_input_error("substrate.eps_r must exceed 1");
    if (!(loss_tangent >= 0.0)) throw invalid_input_error("substrate.loss_tangent must be >= 0");
    if (!(height_h > 0.0)) throw invalid_input_error("substrate.height_h must be positive");
    if (!(length_sub > 0.0) || !(width_sub > 0.0))
      throw invalid_input_error("substrate extents must be positive");
  }
};

struct PatchDimensions {
  double width_w = 19.0e-3;
  double length_l = 19.0e-3;
  double eps_eff = 0.0;
  double delta_l = 0.0;
  double design_freq_fr = 7.0e9;

  void validate() const {
    if (!(width_w > 0.0) || !(length_l > 0.0))
      throw invalid_input_error("patch width/length must be positive");
    if (!(delta_l > 0.0)) throw invalid_input_error("patch.delta_l must be positive");
    if (!(eps_eff > 1.0)) throw invalid_input_error("patch.eps_eff must exceed 1");
    if (!(design_freq_fr > 0.0))
      throw invalid_input_error("patch.design_freq must be positive");
  }
};

/// Fills eps_eff / delta_L self-consistently from the substrate so a patch
/// given by explicit dimensions still carries its cavity-model quantities.
inline PatchDimensions patch_from_dimensions(double width_w, double length_l,
                                             const SubstrateSpec& sub,
                                             double design_freq) {
  microstrip::DesignInputs in{design_freq, sub.eps_r, sub.height_h};
  PatchDimensions p;
  p.width_w = width_w;
  p.length_l = length_l;
  p.design_freq_fr = design_freq;
  p.eps_eff = microstrip::effective_permittivity(in, width_w);
  p.delta_l = microstrip::length_extension(p.eps_eff, width_w, sub.height_h);
  return p;
}

struct FeedSpec {
  double feed_length_fl = 17.5e-3;
  double feed_width_fw = 3.5e-3;
  double inset_depth = 0.0;     // 0 = plain edge feed; Table I gives no inset
  double inset_gap = 0.5e-3;    // notch clearance each side when inset_depth > 0

  void validate() const {
    if (!(feed_length_fl > 0.0) || !(feed_width_fw > 0.0))
      throw invalid_input_error("feed length/width must be positive");
    if (inset_depth < 0.0 || inset_gap < 0.0)
      throw invalid_input_error("inset depth/gap must be >= 0");
  }
};

struct GroundSpec {
  double ground_length_lg = 15.5e-3;
  double slot_width_gw = 3.5e-3;

  void validate() const {
    if (!(ground_length_lg > 0.0))
      throw invalid_input_error("ground length must be positive");
    if (slot_width_gw < 0.0) throw invalid_input_error("ground slot width must be >= 0");
  }
};

/// The Fig.-2-style cut set: one centered w1 x l1 notch on the far edge and
/// on each side edge, a pair of (w1/2 x l1) notches flanking the feed on the
/// feed-side edge (a centered notch there would sever the feed attachment),
/// and a w2 x l2 cut at the patch center. Total removed area equals four
/// w1 x l1 notches plus the center cut.
struct FractalCutSpec {
  double edge_cut_w1 = 4.0e-3;
  double edge_cut_l1 = 2.0e-3;
  double center_cut_w2 = 2.0e-3;
  double center_cut_l2 = 2.0e-3;
  double feed_clearance = 1.0e-3;  // gap between feed edge and the flanking cuts

  void validate() const {
    if (!(edge_cut_w1 > 0.0) || !(edge_cut_l1 > 0.0) || !(center_cut_w2 > 0.0) ||
        !(center_cut_l2 > 0.0))
      throw invalid_input_error("fractal cut dimensions must be positive");
    if (feed_clearance < 0.0)
      throw invalid_input_error("fractal cut feed clearance must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Chromosome

/// N x N pixel grid over the patch, row-major. Gene 1 keeps the pixel's
/// copper, 0 removes it. Row 0 is the feed-adjacent row.
struct Chromosome {
  int n = 0;
  std::vector<std::uint8_t> genes;  // n*n entries of 0/1

  static Chromosome all_ones(int n) {
    Chromosome c;
    c.n = n;
    c.genes.assign(static_cast<size_t>(n) * n, 1);
    return c;
  }

  std::uint8_t at(int row, int col) const {
    return genes[static_cast<size_t>(row) * n + col];
  }
  void set(int row, int col, std::uint8_t v) {
    genes[static_cast<size_t>(row) * n + col] = v;
  }

  int popcount() const {
    int s = 0;
    for (auto g : genes) s += g;
    return s;
  }

  bool feed_row_has_copper() const {
    for (int c = 0; c < n; ++c)
      if (at(0, c)) return true;
    return false;
  }

  void validate() const {
    if (n < 1) throw invalid_input_error("chromosome order must be >= 1");
    if (genes.size() != static_cast<size_t>(n) * n)
      throw invalid_input_error("chromosome must hold exactly n^2 genes");
    for (auto g : genes)
      if (g > 1) throw invalid_input_error("chromosome genes must be 0 or 1");
  }

  /// Row-major genes packed 8 per byte, first gene in the low bit.
  std::vector<std::uint8_t> packed() const {
    std::vector<std::uint8_t> bytes((genes.size() + 7) / 8, 0);
    for (size_t i = 0; i < genes.size(); ++i)
      if (genes[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return bytes;
  }

  std::uint64_t hash() const {
    // FNV-1a 64 over the packed bit string.
    std::uint64_t h = 14695981039346656037ull;
    for (std::uint8_t b : packed()) {
      h ^= b;
      h *= 1099511628211ull;
    }
    return h;
  }

  std::string to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (std::uint8_t b : packed()) {
      s += digits[b >> 4];
      s += digits[b & 0xf];
    }
    return s;
  }

  static Chromosome from_hex(int n, const std::string& hex) {
    Chromosome c;
    c.n = n;
    const size_t ngenes = static_cast<size_t>(n) * n;
    const size_t nbytes = (ngenes + 7) / 8;
    if (hex.size() != nbytes * 2)
      throw invalid_input_error("genome hex length mismatch for order " + std::to_string(n));
    auto nibble = [&](char ch) -> unsigned {
      if (ch >= '0' && ch <= '9') return static_cast<unsigned>(ch - '0');
      if (ch >= 'a' && ch <= 'f') return static_cast<unsigned>(ch - 'a' + 10);
      if (ch >= 'A' && ch <= 'F') return static_cast<unsigned>(ch - 'A' + 10);
      throw invalid_input_error("bad hex digit in genome string");
    };
    c.genes.assign(ngenes, 0);
    for (size_t i = 0; i < ngenes; ++i) {
      unsigned byte = (nibble(hex[2 * (i / 8)]) << 4) | nibble(hex[2 * (i / 8) + 1]);
      c.genes[i] = (byte >> (i % 8)) & 1u;
    }
    return c;
  }
};

// ---------------------------------------------------------------------------
// Layout

struct AntennaLayout {
  SubstrateSpec substrate;
  PatchDimensions patch;
  FeedSpec feed;
  GroundSpec ground;
  double patch_x0 = 0, patch_y0 = 0;    // patch outline origin on the board
  std::vector<Rect> copper_regions;     // patch conductor only
  Rect feed_region;                     // feed line conductor
  std::vector<Rect> ground_regions;     // bottom layer

  Rect patch_outline() const {
    return Rect{patch_x0, patch_y0, patch_x0 + patch.width_w,
                patch_y0 + patch.length_l};
  }
  double feed_center_x() const { return 0.5 * (feed_region.x0 + feed_region.x1); }
};

namespace detail {

/// Exact decomposition of base minus cuts into disjoint rectangles using
/// horizontal coordinate slabs. Every cut edge becomes a slab boundary, so a
/// cut either fully covers a slab or misses it.
inline std::vector<Rect> subtract_rects(const Rect& base, const std::vector<Rect>& cuts) {
  std::vector<double> ys{base.y0, base.y1};
  for (const auto& c : cuts) {
    if (!c.overlaps(base)) continue;
    ys.push_back(std::clamp(c.y0, base.y0, base.y1));
    ys.push_back(std::clamp(c.y1, base.y0, base.y1));
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<Rect> out;
  for (size_t s = 0; s + 1 < ys.size(); ++s) {
    const double ya = ys[s], yb = ys[s + 1];
    if (!(yb > ya)) continue;
    // Cut x-intervals covering this slab.
    std::vector<std::pair<double, double>> iv;
    for (const auto& c : cuts) {
      if (c.y0 <= ya && c.y1 >= yb && c.x1 > base.x0 && c.x0 < base.x1)
        iv.emplace_back(std::max(c.x0, base.x0), std::min(c.x1, base.x1));
    }
    std::sort(iv.begin(), iv.end());
    double x = base.x0;
    for (const auto& [a, b] : iv) {
      if (a > x) out.push_back(Rect{x, ya, a, yb});
      x = std::max(x, b);
    }
    if (x < base.x1) out.push_back(Rect{x, ya, base.x1, yb});
  }
  return out;
}

/// Union area of possibly-overlapping rectangles (slab sweep).
inline double union_area(const std::vector<Rect>& rects) {
  std::vector<double> ys;
  for (const auto& r : rects) {
    if (r.empty()) continue;
    ys.push_back(r.y0);
    ys.push_back(r.y1);
  }
  if (ys.empty()) return 0.0;
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  double area = 0.0;
  for (size_t s = 0; s + 1 < ys.size(); ++s) {
    const double ya = ys[s], yb = ys[s + 1];
    std::vector<std::pair<double, double>> iv;
    for (const auto& r : rects)
      if (!r.empty() && r.y0 <= ya && r.y1 >= yb) iv.emplace_back(r.x0, r.x1);
    std::sort(iv.begin(), iv.end());
    double covered = 0.0, x = -1e300;
    for (const auto& [a, b] : iv) {
      if (b <= x) continue;
      covered += b - std::max(a, x);
      x = b;
    }
    area += covered * (yb - ya);
  }
  return area;
}

}  // namespace detail

/// Unoptimized layout: full square patch, inset (or edge) feed from the y=0
/// board edge, partial ground with a centered slot notch under the feed axis.
inline AntennaLayout build_baseline_layout(const SubstrateSpec& substrate,
                                           const PatchDimensions& patch,
                                           const FeedSpec& feed,
                                           const GroundSpec& ground) {
  substrate.validate();
  patch.validate();
  feed.validate();
  ground.validate();

  AntennaLayout lay;
  lay.substrate = substrate;
  lay.patch = patch;
  lay.feed = feed;
  lay.ground = ground;

  const double xc = substrate.width_sub / 2.0;
  lay.patch_x0 = xc - patch.width_w / 2.0;
  lay.patch_y0 = feed.feed_length_fl - feed.inset_depth;

  if (feed.feed_width_fw >= substrate.width_sub)
    throw dimension_conflict_error("feed width exceeds the substrate width");
  if (feed.feed_width_fw >= patch.width_w)
    throw dimension_conflict_error("feed width must be smaller than the patch width");
  if (feed.inset_depth >= patch.length_l)
    throw dimension_conflict_error("inset depth must be smaller than the patch length");
  if (lay.patch_x0 < 0.0 || lay.patch_x0 + patch.width_w > substrate.width_sub)
    throw dimension_conflict_error("patch exceeds the substrate width");
  if (lay.patch_y0 < 0.0 || lay.patch_y0 + patch.length_l > substrate.length_sub)
    throw dimension_conflict_error("patch exceeds the substrate length");
  if (feed.feed_length_fl > substrate.length_sub)
    throw dimension_conflict_error("feed exceeds the substrate length");
  if (!(ground.ground_length_lg < substrate.length_sub))
    throw dimension_conflict_error("partial ground must be shorter than the substrate");
  if (!(ground.slot_width_gw < substrate.width_sub))
    throw dimension_conflict_error("ground slot exceeds the substrate width");

  lay.feed_region = Rect{xc - feed.feed_width_fw / 2.0, 0.0,
                         xc + feed.feed_width_fw / 2.0, feed.feed_length_fl};

  const Rect outline = lay.patch_outline();
  if (feed.inset_depth > 0.0) {
    const Rect notch{lay.feed_region.x0 - feed.inset_gap, outline.y0,
                     lay.feed_region.x1 + feed.inset_gap, outline.y0 + feed.inset_depth};
    lay.copper_regions = detail::subtract_rects(outline, {notch});
  } else {
    lay.copper_regions = {outline};
  }

  const Rect ground_rect{0.0, 0.0, substrate.width_sub, ground.ground_length_lg};
  if (ground.slot_width_gw > 0.0) {
    // Table I names only the slot width; modeled as a centered square notch
    // in the ground's patch-side edge, on the feed axis.
    const double gw = ground.slot_width_gw;
    const Rect slot{xc - gw / 2.0, std::max(0.0, ground.ground_length_lg - gw),
                    xc + gw / 2.0, ground.ground_length_lg};
    lay.ground_regions = detail::subtract_rects(ground_rect, {slot});
  } else {
    lay.ground_regions = {ground_rect};
  }
  return lay;
}

/// The region genes/cuts must keep clear: the feed conductor plus its inset
/// notch, extended to the feed tip.
inline Rect feed_junction_region(const AntennaLayout& lay) {
  const double gap = lay.feed.inset_depth > 0.0 ? lay.feed.inset_gap : 0.0;
  return Rect{lay.feed_region.x0 - gap, lay.patch_y0, lay.feed_region.x1 + gap,
              lay.feed.feed_length_fl};
}

inline std::vector<Rect> fractal_cut_rects(const AntennaLayout& lay,
                                           const FractalCutSpec& cuts) {
  cuts.validate();
  const Rect p = lay.patch_outline();
  const double xc = 0.5 * (p.x0 + p.x1);
  const double yc = 0.5 * (p.y0 + p.y1);
  const double w1 = cuts.edge_cut_w1, l1 = cuts.edge_cut_l1;

  std::vector<Rect> out;
  out.push_back(Rect{xc - w1 / 2, p.y1 - l1, xc + w1 / 2, p.y1});        // far edge
  out.push_back(Rect{p.x1 - l1, yc - w1 / 2, p.x1, yc + w1 / 2});        // right edge
  out.push_back(Rect{p.x0, yc - w1 / 2, p.x0 + l1, yc + w1 / 2});        // left edge
  const double fx0 = lay.feed_region.x0 - cuts.feed_clearance;
  const double fx1 = lay.feed_region.x1 + cuts.feed_clearance;
  out.push_back(Rect{fx0 - w1 / 2, p.y0, fx0, p.y0 + l1});               // feed-side pair
  out.push_back(Rect{fx1, p.y0, fx1 + w1 / 2, p.y0 + l1});
  out.push_back(Rect{xc - cuts.center_cut_w2 / 2, yc - cuts.center_cut_l2 / 2,
                     xc + cuts.center_cut_w2 / 2, yc + cuts.center_cut_l2 / 2});

  const Rect junction = feed_junction_region(lay);
  for (const auto& c : out) {
    if (!p.contains_rect(c))
      throw dimension_conflict_error("fractal cut falls outside the patch outline");
    if (c.overlaps(junction))
      throw dimension_conflict_error("fractal cut overlaps the feed junction");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rasterization and connectivity

/// Binary occupancy mask of the top-layer copper (patch + feed) sampled at
/// cell centers. Used for the single-island check and for normalized layout
/// comparison; two rectangle decompositions of the same copper set produce
/// identical masks.
struct CopperMask {
  int nx = 0, ny = 0;
  double cell = 0.0;
  std::vector<std::uint8_t> cells;  // nx*ny, x-major rows: idx = j*nx + i

  bool at(int i, int j) const { return cells[static_cast<size_t>(j) * nx + i] != 0; }
};

inline CopperMask rasterize_top_copper(const AntennaLayout& lay, double cell) {
  if (!(cell > 0.0)) throw invalid_input_error("raster cell size must be positive");
  CopperMask m;
  m.cell = cell;
  m.nx = static_cast<int>(std::ceil(lay.substrate.width_sub / cell));
  m.ny = static_cast<int>(std::ceil(lay.substrate.length_sub / cell));
  m.cells.assign(static_cast<size_t>(m.nx) * m.ny, 0);
  auto paint = [&](const Rect& r) {
    if (r.empty()) return;
    int i0 = std::max(0, static_cast<int>(std::floor(r.x0 / cell + 0.5)));
    int i1 = std::min(m.nx, static_cast<int>(std::floor(r.x1 / cell + 0.5)));
    int j0 = std::max(0, static_cast<int>(std::floor(r.y0 / cell + 0.5)));
    int j1 = std::min(m.ny, static_cast<int>(std::floor(r.y1 / cell + 0.5)));
    // center-in-rect sampling: cell (i,j) center is at ((i+0.5)c, (j+0.5)c)
    for (int j = j0; j < j1; ++j)
      for (int i = i0; i < i1; ++i) m.cells[static_cast<size_t>(j) * m.nx + i] = 1;
  };
  for (const auto& r : lay.copper_regions) paint(r);
  paint(lay.feed_region);
  return m;
}

/// True when the top copper forms one 4-connected island that includes the
/// feed line. Raster resolution adapts to the smallest feature present.
inline bool is_single_island(const AntennaLayout& lay, double cell = 0.0) {
  if (cell <= 0.0) {
    cell = 0.25e-3;
    for (const auto& r : lay.copper_regions) {
      if (r.empty()) continue;
      cell = std::min(cell, std::max(1e-6, std::min(r.width(), r.height()) / 2.0));
    }
  }
  const CopperMask m = rasterize_top_copper(lay, cell);
  // Seed from the feed region cells.
  std::deque<int> queue;
  std::vector<std::uint8_t> seen(m.cells.size(), 0);
  int total = 0;
  for (size_t idx = 0; idx < m.cells.size(); ++idx) total += m.cells[idx];
  if (total == 0) return false;

  const Rect f = lay.feed_region;
  int fi = std::clamp(static_cast<int>((f.x0 + f.x1) / 2 / cell), 0, m.nx - 1);
  int fj = std::clamp(static_cast<int>(f.y0 / cell + 0.5), 0, m.ny - 1);
  if (!m.at(fi, fj)) return false;
  const int start = fj * m.nx + fi;
  queue.push_back(start);
  seen[start] = 1;
  int reached = 0;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    ++reached;
    const int i = cur % m.nx, j = cur / m.nx;
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int ni = i + di[d], nj = j + dj[d];
      if (ni < 0 || nj < 0 || ni >= m.nx || nj >= m.ny) continue;
      const int nidx = nj * m.nx + ni;
      if (seen[nidx] || !m.cells[nidx]) continue;
      seen[nidx] = 1;
      queue.push_back(nidx);
    }
  }
  return reached == total;
}

/// Fig.-2 layout: baseline with the fractal cut set removed.
inline AntennaLayout apply_fractal_cuts(const AntennaLayout& base,
                                        const FractalCutSpec& cuts) {
  AntennaLayout lay = base;
  std::vector<Rect> all_cuts = fractal_cut_rects(base, cuts);
  if (base.feed.inset_depth > 0.0) {
    const Rect outline = base.patch_outline();
    all_cuts.push_back(Rect{base.feed_region.x0 - base.feed.inset_gap, outline.y0,
                            base.feed_region.x1 + base.feed.inset_gap,
                            outline.y0 + base.feed.inset_depth});
  }
  lay.copper_regions = detail::subtract_rects(base.patch_outline(), all_cuts);
  if (!is_single_island(lay))
    throw disconnected_island_error("fractal cuts disconnect the patch copper");
  return lay;
}

/// Pixel (row, col) footprint on the board; row 0 adjoins the feed.
inline Rect pixel_rect(const AntennaLayout& base, int n, int row, int col) {
  const Rect p = base.patch_outline();
  const double pw = base.patch.width_w / n;
  const double ph = base.patch.length_l / n;
  return Rect{p.x0 + col * pw, p.y0 + row * ph, p.x0 + (col + 1) * pw,
              p.y0 + (row + 1) * ph};
}

/// Row-0 pixel columns whose footprint overlaps the feed line; the genome's
/// electrical attachment points.
inline std::vector<int> feed_pixel_columns(const AntennaLayout& base, int n) {
  std::vector<int> cols;
  for (int c = 0; c < n; ++c) {
    const Rect pr = pixel_rect(base, n, 0, c);
    if (pr.x0 < base.feed_region.x1 && base.feed_region.x0 < pr.x1) cols.push_back(c);
  }
  return cols;
}

/// 4-connected component id per pixel (-1 for removed pixels), ids in
/// row-major discovery order.
inline std::vector<int> pixel_components(const Chromosome& c) {
  const int n = c.n;
  std::vector<int> comp(static_cast<size_t>(n) * n, -1);
  int next_id = 0;
  for (int start = 0; start < n * n; ++start) {
    if (!c.genes[start] || comp[start] != -1) continue;
    std::deque<int> dq{start};
    comp[start] = next_id;
    while (!dq.empty()) {
      const int cur = dq.front();
      dq.pop_front();
      const int r = cur / n, col = cur % n;
      const int dr[4] = {-1, 1, 0, 0};
      const int dc[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int nr = r + dr[k], nc = col + dc[k];
        if (nr < 0 || nc < 0 || nr >= n || nc >= n) continue;
        const int nidx = nr * n + nc;
        if (c.genes[nidx] && comp[nidx] == -1) {
          comp[nidx] = comp[cur];
          dq.push_back(nidx);
        }
      }
    }
    ++next_id;
  }
  return comp;
}

/// Single-island test on the pixel graph: every kept pixel belongs to one
/// component and that component touches a feed-overlapping row-0 column.
/// This is the authoritative connectivity notion for genome layouts (repair
/// uses the same graph); the raster check covers cut-based layouts.
inline bool chromosome_connected(const Chromosome& c, const AntennaLayout& base) {
  if (c.popcount() == 0) return false;
  const std::vector<int> comp = pixel_components(c);
  int feed_comp = -1;
  for (int col : feed_pixel_columns(base, c.n)) {
    if (c.genes[col]) {  // row 0 index == col
      feed_comp = comp[col];
      break;
    }
  }
  if (feed_comp == -1) return false;
  for (size_t i = 0; i < c.genes.size(); ++i)
    if (c.genes[i] && comp[i] != feed_comp) return false;
  return true;
}

/// Replaces the base patch copper with the chromosome's kept pixels
/// (horizontally merged per row). Feed and ground are untouched. Throws
/// disconnected_island_error when the result is not a single feed-connected
/// island; repair policy lives with the GA, not here.
inline AntennaLayout materialize(const Chromosome& chromosome, const AntennaLayout& base) {
  chromosome.validate();
  const double px = base.patch.width_w / chromosome.n;
  const double py = base.patch.length_l / chromosome.n;
  if (std::abs(px - py) > 1e-9 * std::max(px, py))
    throw invalid_input_error("chromosome order must divide the patch into square pixels");

  AntennaLayout lay = base;
  lay.copper_regions.clear();
  for (int r = 0; r < chromosome.n; ++r) {
    int c = 0;
    while (c < chromosome.n) {
      if (!chromosome.at(r, c)) {
        ++c;
        continue;
      }
      int c_end = c;
      while (c_end < chromosome.n && chromosome.at(r, c_end)) ++c_end;
      const Rect a = pixel_rect(base, chromosome.n, r, c);
      const Rect b = pixel_rect(base, chromosome.n, r, c_end - 1);
      lay.copper_regions.push_back(Rect{a.x0, a.y0, b.x1, a.y1});
      c = c_end;
    }
  }
  if (!chromosome_connected(chromosome, base))
    throw disconnected_island_error(
        "chromosome produces disconnected copper (or no feed attachment)");
  return lay;
}

/// Exact union area of the patch conductor (feed and ground excluded).
inline double copper_area(const AntennaLayout& lay) {
  return detail::union_area(lay.copper_regions);
}

/// Genome encoding of a cut layout: gene is 0 when the pixel center falls in
/// a removed region. Used to seed the GA with the Fig.-2 pattern.
inline Chromosome chromosome_from_cuts(const AntennaLayout& base,
                                       const FractalCutSpec& cuts, int n) {
  const std::vector<Rect> cut_rects = fractal_cut_rects(base, cuts);
  Chromosome c = Chromosome::all_ones(n);
  for (int r = 0; r < n; ++r) {
    for (int col = 0; col < n; ++col) {
      const Rect pr = pixel_rect(base, n, r, col);
      const double cx = 0.5 * (pr.x0 + pr.x1), cy = 0.5 * (pr.y0 + pr.y1);
      for (const auto& cut : cut_rects)
        if (cut.contains_point(cx, cy)) c.set(r, col, 0);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Serialization (mm, 6 decimal places)

namespace detail {
inline std::string mm6(double meters) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", meters * 1e3);
  return buf;
}
inline std::string rect_mm(const Rect& r) {
  return mm6(r.x0) + " " + mm6(r.y0) + " " + mm6(r.x1) + " " + mm6(r.y1);
}
inline Rect rect_from_mm(const std::string& s, const std::string& key) {
  Rect r;
  if (std::sscanf(s.c_str(), "%lf %lf %lf %lf", &r.x0, &r.y0, &r.x1, &r.y1) != 4)
    throw invalid_input_error("bad rectangle for '" + key + "': " + s);
  r.x0 *= 1e-3;
  r.y0 *= 1e-3;
  r.x1 *= 1e-3;
  r.y1 *= 1e-3;
  return r;
}
}  // namespace detail

inline TextDoc layout_to_doc(const AntennaLayout& lay) {
  TextDoc d;
  d.set("layout.format_version", "1");
  d.set("substrate.eps_r", [&] { char b[32]; std::snprintf(b, sizeof(b), "%.9g", lay.substrate.eps_r); return std::string(b); }());
  d.set("substrate.loss_tangent", [&] { char b[32]; std::snprintf(b, sizeof(b), "%.9g", lay.substrate.loss_tangent); return std::string(b); }());
  d.set("substrate.height_mm", detail::mm6(lay.substrate.height_h));
  d.set("substrate.length_mm", detail::mm6(lay.substrate.length_sub));
  d.set("substrate.width_mm", detail::mm6(lay.substrate.width_sub));
  d.set("patch.width_mm", detail::mm6(lay.patch.width_w));
  d.set("patch.length_mm", detail::mm6(lay.patch.length_l));
  d.set("patch.eps_eff", [&] { char b[32]; std::snprintf(b, sizeof(b), "%.9g", lay.patch.eps_eff); return std::string(b); }());
  d.set("patch.delta_l_mm", detail::mm6(lay.patch.delta_l));
  d.set("patch.design_freq_hz", [&] { char b[32]; std::snprintf(b, sizeof(b), "%.9g", lay.patch.design_freq_fr); return std::string(b); }());
  d.set("patch.origin_mm", detail::mm6(lay.patch_x0) + " " + detail::mm6(lay.patch_y0));
  d.set("feed.length_mm", detail::mm6(lay.feed.feed_length_fl));
  d.set("feed.width_mm", detail::mm6(lay.feed.feed_width_fw));
  d.set("feed.inset_depth_mm", detail::mm6(lay.feed.inset_depth));
  d.set("feed.inset_gap_mm", detail::mm6(lay.feed.inset_gap));
  d.set("ground.length_mm", detail::mm6(lay.ground.ground_length_lg));
  d.set("ground.slot_width_mm", detail::mm6(lay.ground.slot_width_gw));
  d.set("feed.rect_mm", detail::rect_mm(lay.feed_region));
  d.set_i64("copper.count", static_cast<long long>(lay.copper_regions.size()));
  for (size_t i = 0; i < lay.copper_regions.size(); ++i)
    d.set("copper." + std::to_string(i), detail::rect_mm(lay.copper_regions[i]));
  d.set_i64("groundmetal.count", static_cast<long long>(lay.ground_regions.size()));
  for (size_t i = 0; i < lay.ground_regions.size(); ++i)
    d.set("groundmetal." + std::to_string(i), detail::rect_mm(lay.ground_regions[i]));
  return d;
}

inline AntennaLayout layout_from_doc(const TextDoc& d) {
  AntennaLayout lay;
  lay.substrate.eps_r = d.get_f64("substrate.eps_r");
  lay.substrate.loss_tangent = d.get_f64("substrate.loss_tangent");
  lay.substrate.height_h = d.get_f64("substrate.height_mm") * 1e-3;
  lay.substrate.length_sub = d.get_f64("substrate.length_mm") * 1e-3;
  lay.substrate.width_sub = d.get_f64("substrate.width_mm") * 1e-3;
  lay.patch.width_w = d.get_f64("patch.width_mm") * 1e-3;
  lay.patch.length_l = d.get_f64("patch.length_mm") * 1e-3;
  lay.patch.eps_eff = d.get_f64("patch.eps_eff");
  lay.patch.delta_l = d.get_f64("patch.delta_l_mm") * 1e-3;
  lay.patch.design_freq_fr = d.get_f64("patch.design_freq_hz");
  {
    double ox = 0, oy = 0;
    if (std::sscanf(d.get("patch.origin_mm").c_str(), "%lf %lf", &ox, &oy) != 2)
      throw invalid_input_error("bad patch.origin_mm");
    lay.patch_x0 = ox * 1e-3;
    lay.patch_y0 = oy * 1e-3;
  }
  lay.feed.feed_length_fl = d.get_f64("feed.length_mm") * 1e-3;
  lay.feed.feed_width_fw = d.get_f64("feed.width_mm") * 1e-3;
  lay.feed.inset_depth = d.get_f64("feed.inset_depth_mm") * 1e-3;
  lay.feed.inset_gap = d.get_f64("feed.inset_gap_mm") * 1e-3;
  lay.ground.ground_length_lg = d.get_f64("ground.length_mm") * 1e-3;
  lay.ground.slot_width_gw = d.get_f64("ground.slot_width_mm") * 1e-3;
  lay.feed_region = detail::rect_from_mm(d.get("feed.rect_mm"), "feed.rect_mm");
  const long long nc = d.get_i64("copper.count");
  for (long long i = 0; i < nc; ++i) {
    const std::string key = "copper." + std::to_string(i);
    lay.copper_regions.push_back(detail::rect_from_mm(d.get(key), key));
  }
  const long long ng = d.get_i64("groundmetal.count");
  for (long long i = 0; i < ng; ++i) {
    const std::string key = "groundmetal." + std::to_string(i);
    lay.ground_regions.push_back(detail::rect_from_mm(d.get(key), key));
  }
  return lay;
}

}  // namespace geometry
}  // namespace fracpatch

#endif  // FRACPATCH_GEOMETRY_HPP
