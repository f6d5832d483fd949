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

#ifndef FRACPATCH_CONSTANTS_HPP
#define FRACPATCH_CONSTANTS_HPP

namespace fracpatch {

// Physical constants. c0 is exact by SI definition; eps0/mu0 follow from it
// with the pre-2019 exact mu0 = 4*pi*1e-7, which keeps eta0 = mu0*c0 consistent.
namespace constants {
inline constexpr double c0 = 299792458.0;            // m/s
inline constexpr double mu0 = 1.25663706143591729539e-6;  // 4*pi*1e-7 H/m
inline constexpr double eps0 = 8.85418781762038985054e-12;  // 1/(mu0*c0^2) F/m
inline constexpr double eta0 = 376.730313461770655468;     // mu0*c0 ohm
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

}  // namespace fracpatch

#endif  // FRACPATCH_CONSTANTS_HPP
