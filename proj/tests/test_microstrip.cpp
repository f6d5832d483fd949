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

#include <cmath>
#include <random>

#include "fracpatch/constants.hpp"
#include "fracpatch/microstrip.hpp"
#include "oracle_values.hpp"
#include "oracles.hpp"

using namespace fracpatch;
using microstrip::DesignInputs;
using Catch::Approx;

TEST_CASE("patch width at the paper's 7 GHz design point") {
  DesignInputs in{7e9, 4.4, 1.57e-3};
  CHECK(microstrip::patch_width(in) ==
        Approx(oracle_values::kDesignW7GHz).epsilon(1e-12));
}

TEST_CASE("patch width halves when the frequency doubles") {
  DesignInputs a{3.2e9, 3.1, 0.8e-3};
  DesignInputs b{6.4e9, 3.1, 0.8e-3};
  CHECK(microstrip::patch_width(b) ==
        Approx(microstrip::patch_width(a) / 2.0).epsilon(1e-14));
}

TEST_CASE("patch width at eps_r = 1 is the free-space half wavelength") {
  DesignInputs in{7e9, 1.0, 1e-3};
  CHECK(microstrip::patch_width(in) ==
        Approx(constants::c0 / (2.0 * 7e9)).epsilon(1e-14));
  CHECK(microstrip::patch_width(in) ==
        Approx(oracle_values::kDesignWEps1).epsilon(1e-12));
}

TEST_CASE("effective permittivity at the design point") {
  DesignInputs in{7e9, 4.4, 1.57e-3};
  CHECK(microstrip::effective_permittivity(in, oracle_values::kDesignW7GHz) ==
        Approx(oracle_values::kDesignEpsEff7GHz).epsilon(1e-12));
}

TEST_CASE("effective permittivity limits") {
  DesignInputs in{5e9, 4.4, 1e-7};
  // h/W -> 0 pushes eps_eff toward eps_r.
  CHECK(microstrip::effective_permittivity(in, 0.1) == Approx(4.4).margin(1e-5));
  DesignInputs air{5e9, 1.0, 2e-3};
  CHECK(microstrip::effective_permittivity(air, 0.013) == Approx(1.0).margin(0.0));
  CHECK(microstrip::effective_permittivity(air, 0.5) == Approx(1.0).margin(0.0));
}

TEST_CASE("length extension at the design point") {
  CHECK(microstrip::length_extension(oracle_values::kDesignEpsEff7GHz,
                                     oracle_values::kDesignW7GHz, 1.57e-3) ==
        Approx(oracle_values::kDesignDeltaL7GHz).epsilon(1e-12));
}

TEST_CASE("length extension scales linearly in h at fixed W/h") {
  const double ee = 3.5;
  const double d1 = microstrip::length_extension(ee, 8.0e-3, 1.0e-3);
  const double d2 = microstrip::length_extension(ee, 16.0e-3, 2.0e-3);
  CHECK(d2 == Approx(2.0 * d1).epsilon(1e-13));
}

TEST_CASE("length extension rejects the denominator pole") {
  CHECK_THROWS_AS(microstrip::length_extension(0.258, 0.01, 1e-3),
                  invalid_input_error);
  CHECK_THROWS_AS(microstrip::length_extension(0.1, 0.01, 1e-3),
                  invalid_input_error);
}

TEST_CASE("patch length at the design point") {
  DesignInputs in{7e9, 4.4, 1.57e-3};
  CHECK(microstrip::patch_length(in, oracle_values::kDesignEpsEff7GHz,
                                 oracle_values::kDesignDeltaL7GHz) ==
        Approx(oracle_values::kDesignL7GHz).epsilon(1e-12));
}

TEST_CASE("patch length with zero extension is the effective half wavelength") {
  DesignInputs in{2e9, 4.4, 1.57e-3};
  CHECK(microstrip::patch_length(in, 4.0, 0.0) ==
        Approx(constants::c0 / (2.0 * 2e9 * 2.0)).epsilon(1e-14));
}

TEST_CASE("patch length rejects non-physical extension") {
  DesignInputs in{60e9, 4.4, 1.57e-3};
  // Half wavelength at 60 GHz in eps_eff 4 is ~1.25 mm; 2*dL = 4 mm exceeds it.
  CHECK_THROWS_AS(microstrip::patch_length(in, 4.0, 2e-3), invalid_input_error);
}

TEST_CASE("predict_resonance inverts patch_length") {
  DesignInputs in{7e9, 4.4, 1.57e-3};
  const auto d = microstrip::design_patch(in);
  const double f = microstrip::predict_resonance(d.length_l, d.eps_eff, d.delta_l);
  CHECK(f == Approx(7e9).epsilon(1e-9));
}

TEST_CASE("predict_resonance trivial dL=0 eps=1 case") {
  // L = half free-space wavelength at 1 GHz resonates at exactly 1 GHz.
  const double l = constants::c0 / (2.0 * 1e9);
  CHECK(microstrip::predict_resonance(l, 1.0, 0.0) == Approx(1e9).epsilon(1e-14));
  CHECK(microstrip::predict_resonance(2.0 * l, 1.0, 0.0) == Approx(0.5e9).epsilon(1e-14));
}

TEST_CASE("cavity estimate for the Table I patch") {
  const double f = microstrip::cavity_resonance_for_patch(19e-3, 19e-3, 4.4, 1.57e-3);
  CHECK(f == Approx(oracle_values::kTableOneCavityHz).epsilon(1e-12));
}

TEST_CASE("design equations match the independent oracle on random inputs") {
  std::mt19937_64 rng(20260809);
  std::uniform_real_distribution<double> fr(0.5e9, 30e9);
  std::uniform_real_distribution<double> er(1.05, 12.0);
  std::uniform_real_distribution<double> hh(0.1e-3, 3.2e-3);
  for (int trial = 0; trial < 200; ++trial) {
    DesignInputs in{fr(rng), er(rng), hh(rng)};
    const double w = microstrip::patch_width(in);
    const double ee = microstrip::effective_permittivity(in, w);
    const double dl = microstrip::length_extension(ee, w, in.height_h);

    const long double ow = oracles::patch_width(in.f_r, in.eps_r);
    const long double oee = oracles::eps_eff(in.eps_r, in.height_h, ow);
    const long double odl = oracles::delta_l(oee, ow, in.height_h);
    CHECK(w == Approx(static_cast<double>(ow)).epsilon(1e-9));
    CHECK(ee == Approx(static_cast<double>(oee)).epsilon(1e-9));
    CHECK(dl == Approx(static_cast<double>(odl)).epsilon(1e-9));

    const long double ol = oracles::patch_length(in.f_r, oee, odl);
    if (ol > 0.0L) {
      CHECK(microstrip::patch_length(in, ee, dl) ==
            Approx(static_cast<double>(ol)).epsilon(1e-9));
    }
  }
}

TEST_CASE("monotonicity: W and L decrease with frequency, eps_eff grows with W") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> fr(1e9, 12e9);
  for (int trial = 0; trial < 100; ++trial) {
    double f1 = fr(rng), f2 = fr(rng);
    if (f1 == f2) continue;
    if (f1 > f2) std::swap(f1, f2);
    DesignInputs a{f1, 4.4, 1.57e-3};
    DesignInputs b{f2, 4.4, 1.57e-3};
    CHECK(microstrip::patch_width(a) > microstrip::patch_width(b));
    const auto da = microstrip::design_patch(a);
    const auto db = microstrip::design_patch(b);
    CHECK(da.length_l > db.length_l);
    CHECK(microstrip::effective_permittivity(a, 0.02) >
          microstrip::effective_permittivity(a, 0.01));
  }
}

TEST_CASE("eps_eff stays within [1, eps_r]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> er(1.0 + 1e-9, 12.0);
  std::uniform_real_distribution<double> wr(1e-4, 0.1);
  std::uniform_real_distribution<double> hr(1e-5, 5e-3);
  for (int trial = 0; trial < 500; ++trial) {
    DesignInputs in{1e9, er(rng), hr(rng)};
    const double ee = microstrip::effective_permittivity(in, wr(rng));
    CHECK(ee >= 1.0);
    CHECK(ee <= in.eps_r);
  }
}

TEST_CASE("design inputs are validated") {
  CHECK_THROWS_AS(microstrip::patch_width({0.0, 4.4, 1e-3}), invalid_input_error);
  CHECK_THROWS_AS(microstrip::patch_width({1e9, 0.5, 1e-3}), invalid_input_error);
  CHECK_THROWS_AS(microstrip::patch_width({1e9, 4.4, -1e-3}), invalid_input_error);
}
