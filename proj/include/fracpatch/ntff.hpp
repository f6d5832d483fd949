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

#ifndef FRACPATCH_NTFF_HPP
#define FRACPATCH_NTFF_HPP

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fracpatch/constants.hpp"
#include "fracpatch/errors.hpp"

namespace fracpatch {
namespace ntff {

using cplx = std::complex<double>;

/// One sample of the equivalence surface: tangential E/H phasors at a face
/// center with outward normal n and patch area dA.
struct SurfacePoint {
  double x = 0, y = 0, z = 0;
  double nx = 0, ny = 0, nz = 0;
  double area = 0;
  cplx ex, ey, ez;
  cplx hx, hy, hz;
};

/// Tangential phasors on a closed box around the radiator, one frequency.
struct FieldSurface {
  double frequency = 0.0;
  std::vector<SurfacePoint> points;
};

struct GainPattern {
  double frequency = 0.0;
  std::vector<double> theta_deg;        // [0, 180]
  std::vector<double> phi_deg;          // [0, 360)
  std::vector<double> gain_dbi;         // theta-major: [it * n_phi + ip]
  double peak_gain_dbi = 0.0;
  double peak_theta_deg = 0.0, peak_phi_deg = 0.0;

  double at(size_t it, size_t ip) const { return gain_dbi[it * phi_deg.size() + ip]; }
};

/// Surface-equivalence near-to-far-field transform (radiation vectors
/// N = integral of Js exp(jk r.r'), L = same for Ms; Js = n x H, Ms = -n x E)
/// followed by gain = 4 pi U / P_accepted. Zero accepted power or zero
/// fields report the -inf dBi sentinel rather than an error.
inline GainPattern far_field_gain(const FieldSurface& surface, double accepted_power_w,
                                  int n_theta = 37, int n_phi = 72) {
  if (surface.points.empty()) throw invalid_input_error("empty near-field surface");
  if (n_theta < 2 || n_phi < 1) throw invalid_input_error("bad pattern sampling");

  GainPattern pat;
  pat.frequency = surface.frequency;
  const double k = 2.0 * constants::pi * surface.frequency / constants::c0;
  const double eta = constants::eta0;

  for (int it = 0; it < n_theta; ++it)
    pat.theta_deg.push_back(180.0 * it / (n_theta - 1));
  for (int ip = 0; ip < n_phi; ++ip) pat.phi_deg.push_back(360.0 * ip / n_phi);
  pat.gain_dbi.assign(static_cast<size_t>(n_theta) * n_phi,
                      -std::numeric_limits<double>::infinity());

  pat.peak_gain_dbi = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < n_theta; ++it) {
    const double th = pat.theta_deg[it] * constants::pi / 180.0;
    const double st = std::sin(th), ct = std::cos(th);
    for (int ip = 0; ip < n_phi; ++ip) {
      const double ph = pat.phi_deg[ip] * constants::pi / 180.0;
      const double cp = std::cos(ph), sp = std::sin(ph);
      const double rx = st * cp, ry = st * sp, rz = ct;

      cplx nx_v(0, 0), ny_v(0, 0), nz_v(0, 0);
      cplx lx_v(0, 0), ly_v(0, 0), lz_v(0, 0);
      for (const auto& p : surface.points) {
        // Js = n x H ; Ms = -n x E
        const cplx jx = p.ny * p.hz - p.nz * p.hy;
        const cplx jy = p.nz * p.hx - p.nx * p.hz;
        const cplx jz = p.nx * p.hy - p.ny * p.hx;
        const cplx mx = -(p.ny * p.ez - p.nz * p.ey);
        const cplx my = -(p.nz * p.ex - p.nx * p.ez);
        const cplx mz = -(p.nx * p.ey - p.ny * p.ex);
        const double phase = k * (rx * p.x + ry * p.y + rz * p.z);
        const cplx w = std::polar(p.area, phase);
        nx_v += jx * w;
        ny_v += jy * w;
        nz_v += jz * w;
        lx_v += mx * w;
        ly_v += my * w;
        lz_v += mz * w;
      }
      const cplx n_th = nx_v * (ct * cp) + ny_v * (ct * sp) - nz_v * st;
      const cplx n_ph = -nx_v * sp + ny_v * cp;
      const cplx l_th = lx_v * (ct * cp) + ly_v * (ct * sp) - lz_v * st;
      const cplx l_ph = -lx_v * sp + ly_v * cp;

      const double u = (k * k / (32.0 * constants::pi * constants::pi * eta)) *
                       (std::norm(l_ph + eta * n_th) + std::norm(l_th - eta * n_ph));
      double g_dbi;
      if (accepted_power_w > 0.0 && u > 0.0)
        g_dbi = 10.0 * std::log10(4.0 * constants::pi * u / accepted_power_w);
      else
        g_dbi = -std::numeric_limits<double>::infinity();
      pat.gain_dbi[static_cast<size_t>(it) * n_phi + ip] = g_dbi;
      if (g_dbi > pat.peak_gain_dbi) {
        pat.peak_gain_dbi = g_dbi;
        pat.peak_theta_deg = pat.theta_deg[it];
        pat.peak_phi_deg = pat.phi_deg[ip];
      }
    }
  }
  return pat;
}

/// Gain pattern CSV: freq_hz, theta_deg, phi_deg, gain_dbi.
inline std::string write_gain_csv(const std::vector<GainPattern>& patterns) {
  std::ostringstream out;
  out << "freq_hz,theta_deg,phi_deg,gain_dbi\n";
  char buf[128];
  for (const auto& pat : patterns)
    for (size_t it = 0; it < pat.theta_deg.size(); ++it)
      for (size_t ip = 0; ip < pat.phi_deg.size(); ++ip) {
        std::snprintf(buf, sizeof(buf), "%.8e,%.1f,%.1f,%.4f\n", pat.frequency,
                      pat.theta_deg[it], pat.phi_deg[ip], pat.at(it, ip));
        out << buf;
      }
  return out.str();
}

}  // namespace ntff
}  // namespace fracpatch

#endif  // FRACPATCH_NTFF_HPP
