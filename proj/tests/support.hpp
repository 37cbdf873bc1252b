/*
 * Copyright (c) 2026 The saelstm Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <span>
#include <string>

#include "saelstm/numerics.hpp"
#include "saelstm/random.hpp"

namespace saelstm::testing {

inline constexpr double kFdStep = 1e-6;

// Central difference of f with respect to *p.
inline double central_difference(double* p, const std::function<double()>& f, double h = kFdStep) {
  const double saved = *p;
  *p = saved + h;
  const double up = f();
  *p = saved - h;
  const double down = f();
  *p = saved;
  return (up - down) / (2.0 * h);
}

// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true gradient
// is ~0 from turning truncation noise into a large ratio.
inline double rel_error(double analytic, double numeric, double floor = 1e-4) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Largest rel_error over every entry of params.
inline double max_fd_error(std::span<double> params, std::span<const double> analytic,
                           const std::function<double()>& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    worst = std::max(worst, rel_error(analytic[i], central_difference(&params[i], f)));
  }
  return worst;
}

inline Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(-scale, scale);
  return m;
}

// Scratch directory unique to one test binary, emptied on creation.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("saelstm_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace saelstm::testing
