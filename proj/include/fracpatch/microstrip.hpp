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

#ifndef FRACPATCH_MICROSTRIP_HPP
#define FRACPATCH_MICROSTRIP_HPP

#include <cmath>
#include <string>

#include "fracpatch/constants.hpp"
#include "fracpatch/errors.hpp"

namespace fracpatch {
namespace microstrip {

// Transmission-line model of a rectangular microstrip patch. These are the
// closed-form design equations used to seed geometry and to sanity-check the
// full-wave solver; they are not a substitute for it.

struct DesignInputs {
  double f_r = 0.0;      // design frequency, Hz
  double eps_r = 0.0;    // substrate relative permittivity
  double height_h = 0.0; // substrate thickness, m

  void validate() const {
    if (!(f_r > 0.0)) throw invalid_input_error("f_r must be positive");
    if (!(eps_r >= 1.0)) throw invalid_input_error("eps_r must be >= 1");
    if (!(height_h > 0.0)) throw invalid_input_error("height_h must be positive");
  }
};

/// W = c / (2 f_r sqrt((eps_r + 1)/2))
inline double patch_width(const DesignInputs& in) {
  in.validate();
  return constants::c0 / (2.0 * in.f_r * std::sqrt((in.eps_r + 1.0) / 2.0));
}

/// eps_eff = (eps_r+1)/2 + (eps_r-1)/2 * 1/sqrt(1 + 12 h/W)
inline double effective_permittivity(const DesignInputs& in, double width_w) {
  in.validate();
  if (!(width_w > 0.0)) throw invalid_input_error("width_W must be positive");
  return (in.eps_r + 1.0) / 2.0 +
         (in.eps_r - 1.0) / 2.0 / std::sqrt(1.0 + 12.0 * in.height_h / width_w);
}

/// dL = 0.412 h ((eps_eff+0.3)(W/h+0.264)) / ((eps_eff-0.258)(W/h+0.8))
/// The denominator has a pole at eps_eff = 0.258; physical inputs sit well
/// above it (eps_eff >= 1) but the guard keeps garbage from propagating.
inline double length_extension(double eps_eff, double width_w, double height_h) {
  if (!(width_w > 0.0) || !(height_h > 0.0))
    throw invalid_input_error("width_W and height_h must be positive");
  if (!(eps_eff > 0.258))
    throw invalid_input_error("eps_eff must exceed 0.258 (pole of the length-extension fit)");
  const double w_over_h = width_w / height_h;
  return 0.412 * height_h * ((eps_eff + 0.3) * (w_over_h + 0.264)) /
         ((eps_eff - 0.258) * (w_over_h + 0.8));
}

/// L = c / (2 f_r sqrt(eps_eff)) - 2 dL
inline double patch_length(const DesignInputs& in, double eps_eff, double delta_l) {
  in.validate();
  if (!(eps_eff > 0.0)) throw invalid_input_error("eps_eff must be positive");
  const double l =
      constants::c0 / (2.0 * in.f_r * std::sqrt(eps_eff)) - 2.0 * delta_l;
  if (!(l > 0.0))
    throw invalid_input_error(
        "non-physical patch length: 2*delta_L exceeds the half-wavelength at " +
        std::to_string(in.f_r) + " Hz");
  return l;
}

/// Inverse of patch_length: f_r = c / (2 (L + 2 dL) sqrt(eps_eff)).
inline double predict_resonance(double length_l, double eps_eff, double delta_l) {
  if (!(length_l > 0.0)) throw invalid_input_error("length_L must be positive");
  if (!(eps_eff > 0.0)) throw invalid_input_error("eps_eff must be positive");
  return constants::c0 / (2.0 * (length_l + 2.0 * delta_l) * std::sqrt(eps_eff));
}

/// All four design quantities for one frequency, in evaluation order.
struct PatchDesign {
  double width_w;
  double eps_eff;
  double delta_l;
  double length_l;
};

inline PatchDesign design_patch(const DesignInputs& in) {
  PatchDesign d{};
  d.width_w = patch_width(in);
  d.eps_eff = effective_permittivity(in, d.width_w);
  d.delta_l = length_extension(d.eps_eff, d.width_w, in.height_h);
  d.length_l = patch_length(in, d.eps_eff, d.delta_l);
  return d;
}

/// Cavity-model resonance estimate for a fixed patch (the design equations
/// run "backwards"): eps_eff and dL are evaluated at the patch's own width,
/// mirroring the forward path.
inline double cavity_resonance_for_patch(double length_l, double width_w,
                                         double eps_r, double height_h) {
  DesignInputs in{1e9, eps_r, height_h};  // f_r unused beyond validation
  const double ee = effective_permittivity(in, width_w);
  const double dl = length_extension(ee, width_w, height_h);
  return predict_resonance(length_l, ee, dl);
}

}  // namespace microstrip
}  // namespace fracpatch

#endif  // FRACPATCH_MICROSTRIP_HPP
