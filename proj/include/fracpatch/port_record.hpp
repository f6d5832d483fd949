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

#ifndef FRACPATCH_PORT_RECORD_HPP
#define FRACPATCH_PORT_RECORD_HPP

#include <cmath>
#include <vector>

#include "fracpatch/errors.hpp"

namespace fracpatch {

/// Gaussian-modulated sine drive, v(t) = A exp(-(t-t0)^2/(2 sigma^2)) sin(2 pi f0 (t-t0)).
struct SourceSpec {
  double f0 = 5.5e9;        // center frequency, Hz
  double sigma_t = 0.0;     // envelope width, s; 0 = derive from band below
  double t0 = 0.0;          // delay, s; 0 = derive (6 sigma)
  double amplitude = 1.0;   // volts
  double band_lo = 1.0e9;   // spectral coverage targets used when sigma_t == 0
  double band_hi = 10.0e9;

  /// Width such that the spectrum at the band edges keeps >= 10% of the peak.
  double resolved_sigma_t() const {
    if (sigma_t > 0.0) return sigma_t;
    const double df = std::max(f0 - band_lo, band_hi - f0);
    const double pi = 3.14159265358979323846;
    return std::sqrt(std::log(10.0) / 2.0) / (pi * df);
  }
  double resolved_t0() const { return t0 > 0.0 ? t0 : 6.0 * resolved_sigma_t(); }

  double value(double t) const {
    const double s = resolved_sigma_t();
    const double d = t - resolved_t0();
    const double pi = 3.14159265358979323846;
    return amplitude * std::exp(-d * d / (2.0 * s * s)) * std::sin(2.0 * pi * f0 * d);
  }
};

/// Port voltage/current time series from one simulation. Voltage samples sit
/// on integer steps t = n dt; the current is circuit-consistent with the
/// semi-implicit source update and sits on half steps t = (n + 1/2) dt. The
/// S-parameter extraction compensates the half-step offset in frequency
/// domain, so keep the convention when constructing records by hand.
struct PortRecord {
  double dt = 0.0;
  double z0 = 50.0;
  SourceSpec source;
  std::vector<double> voltage;  // V, at n dt
  std::vector<double> current;  // A, at (n + 1/2) dt, positive into the antenna

  void validate() const {
    if (!(dt > 0.0)) throw invalid_input_error("port record dt must be positive");
    if (voltage.size() != current.size() || voltage.empty())
      throw invalid_input_error("port series must be equal-length and non-empty");
    for (size_t i = 0; i < voltage.size(); ++i)
      if (!std::isfinite(voltage[i]) || !std::isfinite(current[i]))
        throw divergence_error("non-finite sample in port record");
  }

  /// Ratio of the peak |V| in the trailing 10% of the run to the overall
  /// peak; a crude ring-down measure used for the non-convergence warning.
  double residual_ring() const {
    double peak = 0.0, tail = 0.0;
    const size_t n = voltage.size();
    const size_t tail_start = n - std::max<size_t>(1, n / 10);
    for (size_t i = 0; i < n; ++i) {
      peak = std::max(peak, std::abs(voltage[i]));
      if (i >= tail_start) tail = std::max(tail, std::abs(voltage[i]));
    }
    return peak > 0.0 ? tail / peak : 0.0;
  }
};

}  // namespace fracpatch

#endif  // FRACPATCH_PORT_RECORD_HPP
