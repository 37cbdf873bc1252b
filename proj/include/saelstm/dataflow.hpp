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
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "saelstm/numerics.hpp"

namespace saelstm {

// Width of the feature vector the models consume.
inline constexpr std::size_t kFeatureWidth = 13;

enum class ColumnKind { kNumeric, kCategorical };

// Describes a UGRansome-format CSV. column_names lists every column the
// pipeline reads, the target included; class_labels fixes the class index
// order used everywhere downstream.
struct FeatureSchema {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::string target_column;
  std::vector<std::string> class_labels;

  // Throws SchemaError unless the target is present exactly once, 13 feature
  // columns remain, and the labels are distinct and lexicographically ordered.
  void validate() const;

  std::vector<std::string> feature_names() const;
  std::vector<ColumnKind> feature_kinds() const;
  std::size_t num_classes() const { return class_labels.size(); }
  std::optional<std::size_t> class_index(std::string_view label) const;

  // Netflow columns of the public UGRansome CSV, target "Prediction".
  static FeatureSchema ugransome();

  static FeatureSchema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static FeatureSchema load(const std::filesystem::path& path);

  bool operator==(const FeatureSchema&) const = default;
};

struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<double> numbers;       // kNumeric
  std::vector<std::string> strings;  // kCategorical
};

// Parsed rows, feature columns in schema order.
struct RawTable {
  std::vector<RawColumn> columns;
  std::vector<int> labels;
  std::vector<std::size_t> source_lines;

  std::size_t rows() const { return labels.size(); }
  RawTable subset(std::span<const std::size_t> indices) const;
};

RawTable parse_csv(const std::filesystem::path& path, const FeatureSchema& schema);
RawTable parse_csv(std::istream& in, const FeatureSchema& schema, std::string_view source = "<stream>");

// Keeps the first occurrence of every (features, label) row.
RawTable drop_duplicate_rows(const RawTable& table);

enum class UnknownPolicy { kStrict, kLenient };

std::string_view to_string(UnknownPolicy policy);
UnknownPolicy parse_unknown_policy(std::string_view name);

// Per categorical column, the sorted list of observed values; a value's code
// is its position in that list.
struct VocabMap {
  std::map<std::string, std::vector<std::string>> columns;

  std::optional<int> code(const std::string& column, const std::string& value) const;
  const std::string& decode(const std::string& column, int code) const;

  nlohmann::json to_json() const;
  static VocabMap from_json(const nlohmann::json& j);

  bool operator==(const VocabMap&) const = default;
};

VocabMap build_vocab(const RawTable& table);

struct ExampleTable {
  Matrix features;  // rows x feature width
  std::vector<int> labels;

  std::size_t rows() const { return labels.size(); }
  ExampleTable subset(std::span<const std::size_t> indices) const;
};

// Replaces categorical values by their codes. Without a vocabulary one is
// built from the table. Unseen values raise DataError under kStrict and map
// to the vocabulary size under kLenient.
std::pair<ExampleTable, VocabMap> encode_categoricals(const RawTable& table,
                                                      const VocabMap* vocab = nullptr,
                                                      UnknownPolicy policy = UnknownPolicy::kStrict);

struct NormStats {
  Vector min;
  Vector max;

  nlohmann::json to_json() const;
  static NormStats from_json(const nlohmann::json& j);

  bool operator==(const NormStats&) const = default;
};

// Column-wise min-max scaling. Without stats they are fitted on the input;
// with stats the mapped values are clipped to [0, 1]. Constant columns map to 0.
std::pair<Matrix, NormStats> minmax_normalize(const Matrix& table, const NormStats* stats = nullptr);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per class, round-half-even(n_c * test_fraction) rows (kept within
// [1, n_c - 1]) go to test, picked by a seeded shuffle. Index lists are sorted.
SplitIndices stratified_split_indices(std::span<const int> labels, std::size_t num_classes,
                                      double test_fraction, std::uint64_t seed);

std::pair<ExampleTable, ExampleTable> stratified_split(const ExampleTable& table, std::size_t num_classes,
                                                       double test_fraction, std::uint64_t seed);

std::vector<std::size_t> class_counts(std::span<const int> labels, std::size_t num_classes);

struct ClassDistribution {
  std::vector<std::vector<std::size_t>> per_subset;  // [subset][class]
  std::vector<std::size_t> totals;                   // [class]
  std::vector<double> means;                         // [class], mean across subsets
};

ClassDistribution class_distribution(const std::vector<std::vector<int>>& subsets, std::size_t num_classes);

struct PreprocessOptions {
  double test_fraction = 0.2;
  std::uint64_t split_seed = 42;
  UnknownPolicy unknown_policy = UnknownPolicy::kLenient;
  bool drop_duplicates = false;
};

// Everything inference needs to turn a raw CSV into model inputs.
struct PreprocessManifest {
  FeatureSchema schema;
  VocabMap vocab;
  NormStats stats;
  UnknownPolicy unknown_policy = UnknownPolicy::kLenient;
  std::uint64_t split_seed = 42;
  double test_fraction = 0.2;
  bool drop_duplicates = false;
  std::size_t rows_total = 0;
  std::size_t rows_train = 0;
  std::size_t rows_test = 0;
  std::vector<std::size_t> train_class_counts;
  std::vector<std::size_t> test_class_counts;

  nlohmann::json to_json() const;
  static PreprocessManifest from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static PreprocessManifest load(const std::filesystem::path& path);

  bool operator==(const PreprocessManifest&) const = default;
};

struct PreprocessResult {
  ExampleTable train;
  ExampleTable test;
  PreprocessManifest manifest;
};

// Split, then fit vocabulary and normalization on the training rows only.
PreprocessResult preprocess(const RawTable& table, const FeatureSchema& schema, const PreprocessOptions& options);

// Inference path: stored vocabulary and stats, no refitting.
ExampleTable apply_manifest(const RawTable& table, const PreprocessManifest& manifest);

// Normalized example tables on disk: feature columns then "label".
void write_example_table(const std::filesystem::path& path, const ExampleTable& table,
                         const std::vector<std::string>& feature_names);
ExampleTable read_example_table(const std::filesystem::path& path);

}  // namespace saelstm
