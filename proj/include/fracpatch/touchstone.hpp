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

#ifndef FRACPATCH_TOUCHSTONE_HPP
#define FRACPATCH_TOUCHSTONE_HPP

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "fracpatch/constants.hpp"
#include "fracpatch/errors.hpp"
#include "fracpatch/rf_metrics.hpp"

namespace fracpatch {
namespace touchstone {

/// Touchstone v1 one-port writer: `# HZ S RI R 50` and one
/// `f Re(S11) Im(S11)` line per frequency, 9 significant digits.
inline std::string write_s1p(const rf::FrequencyResponse& resp) {
  resp.validate();
  std::ostringstream out;
  out << "! 1-port S-parameters (reflection at the feed port)\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# HZ S RI R %g\n", resp.z0);
  out << buf;
  for (size_t i = 0; i < resp.frequencies.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.8e %.8e %.8e\n", resp.frequencies[i],
                  resp.gamma[i].real(), resp.gamma[i].imag());
    out << buf;
  }
  return out.str();
}

/// Touchstone v1 one-port parser. Accepts HZ/KHZ/MHZ/GHZ and RI/MA/DB data
/// formats so externally produced files load too.
inline rf::FrequencyResponse parse_s1p(const std::string& content,
                                       const std::string& source_name = "s1p") {
  rf::FrequencyResponse resp;
  double freq_scale = 1.0;
  enum class Fmt { RI, MA, DB } fmt = Fmt::RI;
  bool saw_option_line = false;

  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw invalid_input_error(source_name + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto excl = line.find('!');
    if (excl != std::string::npos) line = line.substr(0, excl);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;

    if (first == "#") {
      if (saw_option_line) fail("duplicate option line");
      saw_option_line = true;
      std::string tok;
      std::vector<std::string> toks;
      while (ls >> tok) {
        for (auto& ch : tok) ch = static_cast<char>(std::toupper(ch));
        toks.push_back(tok);
      }
      for (size_t i = 0; i < toks.size(); ++i) {
        const std::string& t = toks[i];
        if (t == "HZ") freq_scale = 1.0;
        else if (t == "KHZ") freq_scale = 1e3;
        else if (t == "MHZ") freq_scale = 1e6;
        else if (t == "GHZ") freq_scale = 1e9;
        else if (t == "S") { /* parameter kind; only S supported */ }
        else if (t == "RI") fmt = Fmt::RI;
        else if (t == "MA") fmt = Fmt::MA;
        else if (t == "DB") fmt = Fmt::DB;
        else if (t == "R") {
          if (i + 1 >= toks.size()) fail("option 'R' without impedance");
          resp.z0 = std::stod(toks[++i]);
        } else {
          fail("unsupported option token '" + t + "'");
        }
      }
      continue;
    }

    double f = 0, u = 0, v = 0;
    try {
      f = std::stod(first);
    } catch (const std::exception&) {
      fail("expected a frequency, got '" + first + "'");
    }
    if (!(ls >> u >> v)) fail("expected 'f re im' triple");
    double extra;
    if (ls >> extra) fail("one-port data line has more than three columns");

    std::complex<double> g;
    switch (fmt) {
      case Fmt::RI: g = {u, v}; break;
      case Fmt::MA: g = std::polar(u, v * constants::pi / 180.0); break;
      case Fmt::DB: g = std::polar(std::pow(10.0, u / 20.0), v * constants::pi / 180.0); break;
    }
    resp.frequencies.push_back(f * freq_scale);
    resp.gamma.push_back(g);
    const std::complex<double> denom = 1.0 - g;
    resp.z_in.push_back(std::abs(denom) < 1e-12
                            ? std::complex<double>(INFINITY, 0.0)
                            : resp.z0 * (1.0 + g) / denom);
  }
  if (!saw_option_line)
    throw invalid_input_error(source_name + ": missing '#' option line");
  if (resp.frequencies.empty())
    throw invalid_input_error(source_name + ": no data lines");
  resp.validate();  // enforces ascending frequencies
  return resp;
}

/// Sweep CSV export: freq_hz, s11_db, vswr, zin_re, zin_im.
inline std::string write_sweep_csv(const rf::FrequencyResponse& resp) {
  std::ostringstream out;
  out << "freq_hz,s11_db,vswr,zin_re,zin_im\n";
  char buf[160];
  for (size_t i = 0; i < resp.frequencies.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.8e,%.6f,%.6f,%.6f,%.6f\n",
                  resp.frequencies[i], rf::return_loss_db(resp.gamma[i]),
                  rf::vswr(resp.gamma[i]), resp.z_in[i].real(), resp.z_in[i].imag());
    out << buf;
  }
  return out.str();
}

}  // namespace touchstone
}  // namespace fracpatch

#endif  // FRACPATCH_TOUCHSTONE_HPP
