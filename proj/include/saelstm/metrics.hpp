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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace saelstm {

// counts(i, j) = number of samples of true class i predicted as j.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return k_; }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * k_ + predicted]; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }

  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;
  std::uint64_t trace() const;
  std::uint64_t total() const;

  // One-vs-rest tallies for class j.
  std::uint64_t true_positives(std::size_t j) const { return at(j, j); }
  std::uint64_t false_positives(std::size_t j) const { return col_sum(j) - at(j, j); }
  std::uint64_t false_negatives(std::size_t j) const { return row_sum(j) - at(j, j); }
  std::uint64_t true_negatives(std::size_t j) const;

  // Shards merge by addition.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, std::size_t classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

// Undefined ratios (0/0) are reported as 0.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

// trace / total. Throws DomainError for an empty matrix.
double overall_accuracy(const ConfusionMatrix& cm);

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Support-weighted mean of each metric. Throws SchemaError on length
// mismatch and DomainError when the supports sum to zero.
AverageMetrics weighted_average(std::span<const ClassMetrics> metrics, std::span<const double> supports);
AverageMetrics weighted_average(std::span<const ClassMetrics> metrics);

// Unweighted mean over classes.
AverageMetrics macro_average(std::span<const ClassMetrics> metrics);

struct MetricsReport {
  std::vector<std::string> labels;
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  AverageMetrics weighted;
  AverageMetrics macro;
  std::uint64_t total_support = 0;
  ConfusionMatrix confusion;
};

MetricsReport make_report(const ConfusionMatrix& cm, const std::vector<std::string>& labels);

nlohmann::json report_metrics_json(const MetricsReport& report);

// Per-class rows, accuracy and average rows, six decimals.
std::string format_report_table(const MetricsReport& report, bool macro = false);

// Header "true\predicted,<labels...>", one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& labels);

}  // namespace saelstm
