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

#ifndef FRACPATCH_ERRORS_HPP
#define FRACPATCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fracpatch {

// Base class for all library errors; CLI maps subclasses to exit codes.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid user input (bad spec values, bad config, bad flags). Exit code 2.
class invalid_input_error : public error {
 public:
  using error::error;
};

// Geometry that cannot be realized (exit code 4).
class dimension_conflict_error : public error {
 public:
  using error::error;
};

class disconnected_island_error : public error {
 public:
  using error::error;
};

// A layout that does not fit in the simulation grid (exit code 4).
class grid_fit_error : public error {
 public:
  using error::error;
};

// FDTD field blow-up (exit code 3).
class divergence_error : public error {
 public:
  using error::error;
};

// S-parameter extraction with no usable excitation at a requested frequency.
class degenerate_spectrum_error : public error {
 public:
  using error::error;
};

// Requested target frequency outside the simulated sweep.
class out_of_range_error : public error {
 public:
  using error::error;
};

// Unreadable, mismatched-version, or tampered checkpoint files.
class corrupt_checkpoint_error : public error {
 public:
  using error::error;
};

// Missing or incomplete run artifacts (exit code 5).
class missing_artifacts_error : public error {
 public:
  using error::error;
};

}  // namespace fracpatch

#endif  // FRACPATCH_ERRORS_HPP
