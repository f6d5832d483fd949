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

#ifndef FRACPATCH_RF_METRICS_HPP
#define FRACPATCH_RF_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "fracpatch/constants.hpp"
#include "fracpatch/errors.hpp"
#include "fracpatch/port_record.hpp"
#include "fracpatch/text_doc.hpp"

namespace fracpatch {
namespace rf {

using cplx = std::complex<double>;

// Sign convention throughout: return loss is stored and plotted as a
// NEGATIVE quantity, RL = 20 log10 |Gamma| (the paper's convention). The
// opposite convention (positive return loss) exists in the wild; this
// library never uses it.

/// Sampled one-port response referenced to z0.
struct FrequencyResponse {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<cplx> gamma;
  std::vector<cplx> z_in;
  double z0 = 50.0;
  double passivity_tolerance = 0.02;

  void validate() const {
    if (frequencies.size() != gamma.size() || frequencies.size() != z_in.size())
      throw invalid_input_error("frequency response arrays must be equal length");
    for (size_t i = 1; i < frequencies.size(); ++i)
      if (!(frequencies[i] > frequencies[i - 1]))
        throw invalid_input_error("frequencies must be strictly increasing");
  }

  /// Indices where |Gamma| exceeds 1 + tolerance (numerical passivity check).
  std::vector<size_t> passivity_violations() const {
    std::vector<size_t> out;
    for (size_t i = 0; i < gamma.size(); ++i)
      if (std::abs(gamma[i]) > 1.0 + passivity_tolerance) out.push_back(i);
    return out;
  }

  /// Complex-linear interpolation of Gamma at f. Throws when f is outside
  /// the sweep.
  cplx gamma_at(double f) const {
    if (frequencies.empty() || f < frequencies.front() || f > frequencies.back())
      throw out_of_range_error("frequency " + std::to_string(f) +
                               " Hz outside the simulated sweep");
    auto it = std::lower_bound(frequencies.begin(), frequencies.end(), f);
    size_t hi = static_cast<size_t>(it - frequencies.begin());
    if (hi == 0) return gamma[0];
    const size_t lo = hi - 1;
    const double w = (f - frequencies[lo]) / (frequencies[hi] - frequencies[lo]);
    return gamma[lo] * (1.0 - w) + gamma[hi] * w;
  }
};

inline double return_loss_db(const cplx& gamma) {
  const double mag = std::abs(gamma);
  if (mag == 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(mag);
}

inline double vswr(const cplx& gamma) {
  const double mag = std::abs(gamma);
  if (mag >= 1.0) return std::numeric_limits<double>::infinity();
  return (1.0 + mag) / (1.0 - mag);
}

inline double gamma_mag_from_return_loss(double rl_db) {
  return std::pow(10.0, rl_db / 20.0);
}

/// Incident/reflected wave decomposition of a recorded port transient:
///   a = (V + Z0 I) / (2 sqrt(Z0)),  b = (V - Z0 I) / (2 sqrt(Z0)),
/// with V, I the DFTs of the port series. The current series sits on half
/// steps; its spectrum is rotated by exp(-j w dt/2) onto the voltage grid.
inline FrequencyResponse extract_response(const PortRecord& record,
                                          const std::vector<double>& freq_grid) {
  record.validate();
  if (freq_grid.empty()) throw invalid_input_error("empty frequency grid");

  FrequencyResponse resp;
  resp.z0 = record.z0;
  resp.frequencies = freq_grid;
  resp.gamma.resize(freq_grid.size());
  resp.z_in.resize(freq_grid.size());

  const size_t n = record.voltage.size();
  const double sqz0 = std::sqrt(record.z0);
  std::vector<cplx> a(freq_grid.size()), b(freq_grid.size());
  double a_peak = 0.0;
  for (size_t k = 0; k < freq_grid.size(); ++k) {
    const double w = 2.0 * constants::pi * freq_grid[k];
    const cplx step = std::polar(1.0, -w * record.dt);
    cplx ph(1.0, 0.0);
    cplx vhat(0.0, 0.0), ihat(0.0, 0.0);
    for (size_t i = 0; i < n; ++i) {
      vhat += record.voltage[i] * ph;
      ihat += record.current[i] * ph;
      ph *= step;
    }
    ihat *= std::polar(1.0, -w * record.dt / 2.0);  // half-step alignment
    vhat *= record.dt;
    ihat *= record.dt;
    a[k] = (vhat + record.z0 * ihat) / (2.0 * sqz0);
    b[k] = (vhat - record.z0 * ihat) / (2.0 * sqz0);
    a_peak = std::max(a_peak, std::abs(a[k]));
  }
  const double floor = 1e-9 * a_peak;
  for (size_t k = 0; k < freq_grid.size(); ++k) {
    if (!(std::abs(a[k]) > floor))
      throw degenerate_spectrum_error(
          "no usable excitation at " + std::to_string(freq_grid[k]) + " Hz");
    resp.gamma[k] = b[k] / a[k];
    const cplx denom = 1.0 - resp.gamma[k];
    resp.z_in[k] = std::abs(denom) < 1e-12
                       ? cplx(std::numeric_limits<double>::infinity(), 0.0)
                       : record.z0 * (1.0 + resp.gamma[k]) / denom;
  }
  return resp;
}

/// Accepted (net delivered) power spectrum at the port, 0.5 Re(V I*), same
/// DFT convention as extract_response. Used as the gain reference power.
inline std::vector<double> accepted_power(const PortRecord& record,
                                          const std::vector<double>& freq_grid) {
  record.validate();
  const size_t n = record.voltage.size();
  std::vector<double> out(freq_grid.size());
  for (size_t k = 0; k < freq_grid.size(); ++k) {
    const double w = 2.0 * constants::pi * freq_grid[k];
    const cplx step = std::polar(1.0, -w * record.dt);
    cplx ph(1.0, 0.0);
    cplx vhat(0.0, 0.0), ihat(0.0, 0.0);
    for (size_t i = 0; i < n; ++i) {
      vhat += record.voltage[i] * ph;
      ihat += record.current[i] * ph;
      ph *= step;
    }
    ihat *= std::polar(1.0, -w * record.dt / 2.0);
    vhat *= record.dt;
    ihat *= record.dt;
    out[k] = 0.5 * (vhat * std::conj(ihat)).real();
  }
  return out;
}

struct Resonance {
  double f_res = 0.0;      // sub-sample refined minimum location
  double rl_min_db = 0.0;
  double band_lo = 0.0;    // threshold crossings (sweep-edge clamped)
  double band_hi = 0.0;
};

/// One entry per contiguous below-threshold segment of the RL curve: the
/// deepest minimum inside the segment, parabolically refined, with the
/// threshold crossings as band edges. Segments are disjoint and ascending
/// by construction. An empty result is a valid "no resonance" answer.
inline std::vector<Resonance> find_resonances(const FrequencyResponse& resp,
                                              double threshold_db = -10.0) {
  resp.validate();
  const size_t n = resp.frequencies.size();
  std::vector<double> rl(n);
  for (size_t i = 0; i < n; ++i) rl[i] = return_loss_db(resp.gamma[i]);

  std::vector<Resonance> out;
  size_t i = 0;
  while (i < n) {
    if (!(rl[i] < threshold_db)) {
      ++i;
      continue;
    }
    const size_t seg_lo = i;
    while (i < n && rl[i] < threshold_db) ++i;
    const size_t seg_hi = i - 1;  // inclusive

    size_t imin = seg_lo;
    for (size_t k = seg_lo; k <= seg_hi; ++k)
      if (rl[k] < rl[imin]) imin = k;

    Resonance r;
    r.rl_min_db = rl[imin];
    r.f_res = resp.frequencies[imin];
    if (imin > 0 && imin + 1 < n) {
      const double ym = rl[imin - 1], y0 = rl[imin], yp = rl[imin + 1];
      const double denom = ym - 2.0 * y0 + yp;
      if (denom > 0.0) {
        const double shift = 0.5 * (ym - yp) / denom;  // in bins
        const double h = resp.frequencies[imin + 1] - resp.frequencies[imin];
        if (std::abs(shift) <= 1.0) r.f_res += shift * h;
      }
    }
    // Band edges by linear interpolation to the threshold crossing.
    if (seg_lo == 0) {
      r.band_lo = resp.frequencies.front();
    } else {
      const double f0 = resp.frequencies[seg_lo - 1], f1 = resp.frequencies[seg_lo];
      const double w = (threshold_db - rl[seg_lo - 1]) / (rl[seg_lo] - rl[seg_lo - 1]);
      r.band_lo = f0 + w * (f1 - f0);
    }
    if (seg_hi + 1 >= n) {
      r.band_hi = resp.frequencies.back();
    } else {
      const double f0 = resp.frequencies[seg_hi], f1 = resp.frequencies[seg_hi + 1];
      const double w = (threshold_db - rl[seg_hi]) / (rl[seg_hi + 1] - rl[seg_hi]);
      r.band_hi = f0 + w * (f1 - f0);
    }
    out.push_back(r);
  }
  return out;
}

struct BandMetrics {
  double target_hz = 0.0;
  double return_loss_db = 0.0;
  double vswr = 0.0;
  double gain_dbi = 0.0;
};

struct BandSummary {
  std::vector<BandMetrics> targets;
  std::vector<Resonance> resonances;
};

/// Per-target RL/VSWR (interpolated from the response) plus the supplied
/// per-target gains and the detected resonances.
inline BandSummary summarize_bands(const FrequencyResponse& resp,
                                   const std::vector<double>& gains_dbi,
                                   const std::vector<double>& targets_hz) {
  resp.validate();
  if (gains_dbi.size() != targets_hz.size())
    throw invalid_input_error("one gain value per target frequency required");
  BandSummary s;
  for (size_t i = 0; i < targets_hz.size(); ++i) {
    const cplx g = resp.gamma_at(targets_hz[i]);  // throws out_of_range_error
    BandMetrics m;
    m.target_hz = targets_hz[i];
    m.return_loss_db = return_loss_db(g);
    m.vswr = vswr(g);
    m.gain_dbi = gains_dbi[i];
    s.targets.push_back(m);
  }
  s.resonances = find_resonances(resp);
  return s;
}

/// One comparison row: positive percentage = improvement in that metric's
/// own sense (deeper RL, lower VSWR, higher gain); negative = regression.
/// The magnitude follows the |delta| / |baseline| * 100 convention.
struct ImprovementRow {
  std::string metric;
  double target_hz = 0.0;
  double baseline = 0.0;
  double candidate = 0.0;
  double improvement_pct = 0.0;
  bool regression = false;
};

inline std::vector<ImprovementRow> compare_summaries(const BandSummary& base,
                                                     const BandSummary& cand) {
  if (base.targets.size() != cand.targets.size())
    throw invalid_input_error("summaries cover different target sets");
  std::vector<ImprovementRow> rows;
  for (size_t i = 0; i < base.targets.size(); ++i) {
    const auto& b = base.targets[i];
    const auto& c = cand.targets[i];
    auto push = [&](const std::string& name, double bv, double cv, double pct) {
      ImprovementRow r;
      r.metric = name;
      r.target_hz = b.target_hz;
      r.baseline = bv;
      r.candidate = cv;
      r.improvement_pct = pct;
      r.regression = pct < 0.0;
      rows.push_back(r);
    };
    push("return_loss_db", b.return_loss_db, c.return_loss_db,
         (std::abs(c.return_loss_db) - std::abs(b.return_loss_db)) /
             std::abs(b.return_loss_db) * 100.0);
    push("vswr", b.vswr, c.vswr, (b.vswr - c.vswr) / b.vswr * 100.0);
    push("gain_dbi", b.gain_dbi, c.gain_dbi,
         (c.gain_dbi - b.gain_dbi) / std::abs(b.gain_dbi) * 100.0);
  }
  return rows;
}

// Text-document (de)serialization of band summaries, shared by checkpoints,
// summary artifacts and the report reader.

namespace detail {
inline std::string f64s(double v) {
  char b[40];
  std::snprintf(b, sizeof(b), "%.17g", v);
  return b;
}
}  // namespace detail

inline void summary_to_doc(TextDoc& d, const std::string& prefix, const BandSummary& s) {
  d.set_i64(prefix + ".targets", static_cast<long long>(s.targets.size()));
  for (size_t i = 0; i < s.targets.size(); ++i) {
    const auto& m = s.targets[i];
    d.set(prefix + ".t" + std::to_string(i),
          detail::f64s(m.target_hz) + " " + detail::f64s(m.return_loss_db) + " " +
              detail::f64s(m.vswr) + " " + detail::f64s(m.gain_dbi));
  }
  d.set_i64(prefix + ".resonances", static_cast<long long>(s.resonances.size()));
  for (size_t i = 0; i < s.resonances.size(); ++i) {
    const auto& r = s.resonances[i];
    d.set(prefix + ".r" + std::to_string(i),
          detail::f64s(r.f_res) + " " + detail::f64s(r.rl_min_db) + " " +
              detail::f64s(r.band_lo) + " " + detail::f64s(r.band_hi));
  }
}

inline BandSummary summary_from_doc(const TextDoc& d, const std::string& prefix) {
  BandSummary s;
  auto parse4 = [&](const std::string& key, double out[4]) {
    std::istringstream ss(d.get(key));
    if (!(ss >> out[0] >> out[1] >> out[2] >> out[3]))
      throw invalid_input_error("bad summary row at '" + key + "'");
  };
  const long long nt = d.get_i64(prefix + ".targets");
  for (long long i = 0; i < nt; ++i) {
    double v[4];
    parse4(prefix + ".t" + std::to_string(i), v);
    s.targets.push_back({v[0], v[1], v[2], v[3]});
  }
  const long long nr = d.get_i64(prefix + ".resonances");
  for (long long i = 0; i < nr; ++i) {
    double v[4];
    parse4(prefix + ".r" + std::to_string(i), v);
    s.resonances.push_back({v[0], v[1], v[2], v[3]});
  }
  return s;
}

}  // namespace rf
}  // namespace fracpatch

#endif  // FRACPATCH_RF_METRICS_HPP
