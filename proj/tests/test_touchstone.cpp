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
#include <sstream>

#include "fracpatch/touchstone.hpp"

using namespace fracpatch;
using rf::cplx;
using Catch::Approx;

namespace {
rf::FrequencyResponse random_response(unsigned seed, size_t count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.0, 0.99);
  std::uniform_real_distribution<double> ph(-3.14, 3.14);
  rf::FrequencyResponse resp;
  for (size_t i = 0; i < count; ++i) {
    resp.frequencies.push_back(1e9 + 1e7 * static_cast<double>(i));
    resp.gamma.push_back(std::polar(mag(rng), ph(rng)));
    resp.z_in.push_back(resp.z0 * (1.0 + resp.gamma.back()) / (1.0 - resp.gamma.back()));
  }
  return resp;
}
}  // namespace

TEST_CASE("s1p header and shape") {
  const auto resp = random_response(1, 5);
  const std::string text = touchstone::write_s1p(resp);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("!", 0) == 0);
  std::getline(in, line);
  CHECK(line == "# HZ S RI R 50");
  size_t data_lines = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++data_lines;
  CHECK(data_lines == 5);
}

TEST_CASE("write/parse round trip preserves the response") {
  const auto resp = random_response(2, 64);
  const auto back = touchstone::parse_s1p(touchstone::write_s1p(resp), "mem");
  REQUIRE(back.frequencies.size() == resp.frequencies.size());
  CHECK(back.z0 == 50.0);
  for (size_t i = 0; i < resp.frequencies.size(); ++i) {
    CHECK(back.frequencies[i] == Approx(resp.frequencies[i]).epsilon(1e-8));
    CHECK(std::abs(back.gamma[i] - resp.gamma[i]) < 1e-7);
  }
}

TEST_CASE("parser accepts GHz / MA / DB variants") {
  const std::string ma =
      "# GHZ S MA R 75\n"
      "1.0 0.5 90.0\n"
      "2.0 0.25 -90.0\n";
  const auto r1 = touchstone::parse_s1p(ma, "ma");
  CHECK(r1.z0 == 75.0);
  CHECK(r1.frequencies[0] == Approx(1e9));
  CHECK(r1.gamma[0].real() == Approx(0.0).margin(1e-12));
  CHECK(r1.gamma[0].imag() == Approx(0.5));

  const std::string db =
      "! comment line\n"
      "# HZ S DB R 50\n"
      "1e9 -20.0 0.0  ! inline comment\n";
  const auto r2 = touchstone::parse_s1p(db, "db");
  CHECK(std::abs(r2.gamma[0]) == Approx(0.1).epsilon(1e-12));
}

TEST_CASE("parser rejects malformed files") {
  CHECK_THROWS_AS(touchstone::parse_s1p("1e9 0.1 0.2\n", "noheader"),
                  invalid_input_error);
  CHECK_THROWS_AS(touchstone::parse_s1p("# HZ S RI R 50\n", "nodata"),
                  invalid_input_error);
  CHECK_THROWS_AS(touchstone::parse_s1p("# HZ S RI R 50\n1e9 0.1\n", "short"),
                  invalid_input_error);
  CHECK_THROWS_AS(
      touchstone::parse_s1p("# HZ S RI R 50\n1e9 0.1 0.2 0.3\n", "wide"),
      invalid_input_error);
  CHECK_THROWS_AS(
      touchstone::parse_s1p("# HZ S RI R 50\n2e9 0 0\n1e9 0 0\n", "order"),
      invalid_input_error);
}

TEST_CASE("sweep csv has the documented columns") {
  const auto resp = random_response(3, 4);
  const std::string csv = touchstone::write_sweep_csv(resp);
  CHECK(csv.rfind("freq_hz,s11_db,vswr,zin_re,zin_im\n", 0) == 0);
  size_t lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 5);
}
