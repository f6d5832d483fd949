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

#ifndef FRACPATCH_EVALUATOR_HPP
#define FRACPATCH_EVALUATOR_HPP

#include <cmath>
#include <string>
#include <vector>

#include "fracpatch/fdtd.hpp"
#include "fracpatch/ga.hpp"
#include "fracpatch/geometry.hpp"
#include "fracpatch/microstrip.hpp"
#include "fracpatch/ntff.hpp"
#include "fracpatch/rf_metrics.hpp"

namespace fracpatch {
namespace eval {

struct SweepSpec {
  double lo_hz = 1.0e9;
  double hi_hz = 10.0e9;
  double step_hz = 10.0e6;

  std::vector<double> grid() const {
    if (!(lo_hz > 0.0) || !(hi_hz > lo_hz) || !(step_hz > 0.0))
      throw invalid_input_error("bad sweep specification");
    std::vector<double> out;
    for (double f = lo_hz; f <= hi_hz * (1.0 + 1e-12); f += step_hz) out.push_back(f);
    return out;
  }
};

/// Everything one full-wave evaluation produces.
struct SimArtifacts {
  rf::FrequencyResponse response;
  std::vector<ntff::GainPattern> gain_patterns;  // one per target
  rf::BandSummary summary;
  PortRecord port;
  bool converged = true;
  double residual_ring = 0.0;
  bool resolution_warning = false;
};

/// One FDTD run of a concrete layout: rasterize, step, extract S11 over the
/// sweep, far-field gain at each target, and the band summary.
inline SimArtifacts simulate_layout(const geometry::AntennaLayout& lay,
                                    const fdtd::GridPreset& preset,
                                    const SweepSpec& sweep,
                                    const std::vector<double>& targets_hz,
                                    const SourceSpec& source = SourceSpec{}) {
  fdtd::SimDomain dom = fdtd::make_domain(lay, preset);
  fdtd::MaterialGrid mat = fdtd::rasterize(lay, dom.grid, dom.placement, source.f0);

  fdtd::SimOptions opt;
  opt.source = source;
  opt.surface_freqs = targets_hz;
  fdtd::SimResult sim = fdtd::run_simulation(mat, dom.grid, opt);

  SimArtifacts art;
  art.port = sim.port;
  art.converged = sim.converged;
  art.residual_ring = sim.residual_ring;
  art.resolution_warning = sim.resolution_warning;
  art.response = rf::extract_response(sim.port, sweep.grid());

  const std::vector<double> p_acc = rf::accepted_power(sim.port, targets_hz);
  std::vector<double> peak_gains;
  for (size_t t = 0; t < targets_hz.size(); ++t) {
    art.gain_patterns.push_back(ntff::far_field_gain(sim.surfaces[t], p_acc[t]));
    peak_gains.push_back(art.gain_patterns.back().peak_gain_dbi);
  }
  art.summary = rf::summarize_bands(art.response, peak_gains, targets_hz);
  return art;
}

/// FDTD-backed GA fitness. Materializes the genome over the base layout and
/// runs the solver at the (typically shortened) evaluation preset.
struct FdtdEvaluator {
  geometry::AntennaLayout base;
  fdtd::GridPreset preset;
  SweepSpec sweep;
  ga::FitnessSpec fitness_spec;
  SourceSpec source;

  ga::EvalResult operator()(const geometry::Chromosome& c) const {
    ga::EvalResult r;
    geometry::AntennaLayout lay = geometry::materialize(c, base);  // may throw
    const SimArtifacts art =
        simulate_layout(lay, preset, sweep, fitness_spec.targets, source);
    r.valid = true;
    r.summary = art.summary;
    r.fitness = ga::fitness(art.summary, fitness_spec);
    return r;
  }
};

/// Closed-form stand-in for the solver (CI and brute-force oracles): the
/// cavity resonance shifted by the slot perimeter (cuts lengthen the current
/// path), a Gaussian pseudo return-loss dip around the shifted resonance,
/// and a fill-ratio gain proxy. Deterministic and cheap; not a predictor of
/// the full-wave result.
struct SurrogateEvaluator {
  geometry::AntennaLayout base;
  ga::FitnessSpec fitness_spec;

  ga::EvalResult operator()(const geometry::Chromosome& c) const {
    geometry::AntennaLayout lay = geometry::materialize(c, base);  // may throw

    const double area = geometry::copper_area(lay);
    const double rho = area / (base.patch.width_w * base.patch.length_l);

    // Exposed pixel-edge count; the full patch scores 4n.
    const int n = c.n;
    int perimeter = 0;
    for (int r = 0; r < n; ++r)
      for (int col = 0; col < n; ++col) {
        if (!c.at(r, col)) continue;
        if (r == 0 || !c.at(r - 1, col)) ++perimeter;
        if (r == n - 1 || !c.at(r + 1, col)) ++perimeter;
        if (col == 0 || !c.at(r, col - 1)) ++perimeter;
        if (col == n - 1 || !c.at(r, col + 1)) ++perimeter;
      }
    const double extra = std::max(0, perimeter - 4 * n);
    const double stretch = 1.0 + 0.5 * extra / (4.0 * n);

    const double f_cavity = microstrip::cavity_resonance_for_patch(
        base.patch.length_l, base.patch.width_w, base.substrate.eps_r,
        base.substrate.height_h);
    const double f_est = f_cavity / stretch;

    rf::BandSummary s;
    for (double t : fitness_spec.targets) {
      const double miss = (f_est - t) / t;
      const double rl = -18.0 * std::exp(-(miss * miss) / (0.1 * 0.1));
      rf::BandMetrics m;
      m.target_hz = t;
      m.return_loss_db = rl;
      const double mag = rf::gamma_mag_from_return_loss(rl);
      m.vswr = mag < 1.0 ? (1.0 + mag) / (1.0 - mag) : 1e9;
      m.gain_dbi = 1.0 + 1.5 * rho;
      s.targets.push_back(m);
    }
    ga::EvalResult r;
    r.valid = true;
    r.summary = s;
    r.fitness = ga::fitness(s, fitness_spec);
    return r;
  }
};

}  // namespace eval
}  // namespace fracpatch

#endif  // FRACPATCH_EVALUATOR_HPP
