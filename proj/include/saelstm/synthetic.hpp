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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "saelstm/numerics.hpp"

namespace saelstm {

// UGRansome-format CSV (FeatureSchema::ugransome() columns) whose rows carry
// class-conditional structure: every informative column is drawn from a
// per-class distribution with a fraction of rows resampled from a shared
// background. Class shares follow the UGRansome19Train split.
std::string synthetic_ugransome_csv(std::size_t rows, std::uint64_t seed);
void write_synthetic_ugransome(const std::filesystem::path& path, std::size_t rows, std::uint64_t seed);

// rows x width table in [0, 1]: rank-`rank` structure plus Gaussian noise.
Matrix low_rank_table(std::size_t rows, std::size_t width, std::size_t rank, double noise, std::uint64_t seed);

struct LabeledTable {
  Matrix features;
  std::vector<int> labels;
};

// per_class points around `classes` well-separated centers in [0, 1]^width.
LabeledTable separable_clusters(std::size_t per_class, std::size_t classes, std::size_t width, std::uint64_t seed);

}  // namespace saelstm
