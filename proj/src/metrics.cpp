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

#include "saelstm/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "saelstm/errors.hpp"

namespace saelstm {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json averages_json(const AverageMetrics& a) {
  return {{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

}  // namespace

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < k_; ++j) s += at(truth, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, predicted);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, i);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::true_negatives(std::size_t j) const {
  return total() - true_positives(j) - false_positives(j) - false_negatives(j);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw ShapeError("cannot merge confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, std::size_t classes) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("confusion_matrix: " + std::to_string(y_true.size()) + " labels vs " +
                     std::to_string(y_pred.size()) + " predictions");
  }
  ConfusionMatrix cm(classes);
  for (std::size_t n = 0; n < y_true.size(); ++n) {
    const int t = y_true[n];
    const int p = y_pred[n];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= classes || static_cast<std::size_t>(p) >= classes) {
      throw DomainError("confusion_matrix: class index out of range at sample " + std::to_string(n));
    }
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out;
  for (std::size_t j = 0; j < cm.classes(); ++j) {
    ClassMetrics m;
    const auto tp = cm.true_positives(j);
    m.precision = ratio(tp, tp + cm.false_positives(j));
    m.recall = ratio(tp, tp + cm.false_negatives(j));
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.support = cm.row_sum(j);
    out.push_back(m);
  }
  return out;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw DomainError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

AverageMetrics weighted_average(std::span<const ClassMetrics> metrics, std::span<const double> supports) {
  if (metrics.size() != supports.size()) {
    throw SchemaError("weighted_average: " + std::to_string(metrics.size()) + " classes vs " +
                      std::to_string(supports.size()) + " supports");
  }
  double total = 0.0;
  AverageMetrics a;
  for (std::size_t j = 0; j < metrics.size(); ++j) {
    a.precision += metrics[j].precision * supports[j];
    a.recall += metrics[j].recall * supports[j];
    a.f1 += metrics[j].f1 * supports[j];
    total += supports[j];
  }
  if (total <= 0.0) throw DomainError("weighted_average: supports sum to zero");
  a.precision /= total;
  a.recall /= total;
  a.f1 /= total;
  return a;
}

AverageMetrics weighted_average(std::span<const ClassMetrics> metrics) {
  std::vector<double> supports;
  for (const auto& m : metrics) supports.push_back(static_cast<double>(m.support));
  return weighted_average(metrics, supports);
}

AverageMetrics macro_average(std::span<const ClassMetrics> metrics) {
  AverageMetrics a;
  if (metrics.empty()) return a;
  for (const auto& m : metrics) {
    a.precision += m.precision;
    a.recall += m.recall;
    a.f1 += m.f1;
  }
  const double n = static_cast<double>(metrics.size());
  a.precision /= n;
  a.recall /= n;
  a.f1 /= n;
  return a;
}

MetricsReport make_report(const ConfusionMatrix& cm, const std::vector<std::string>& labels) {
  if (labels.size() != cm.classes()) throw SchemaError("report labels do not match the confusion matrix");
  MetricsReport r;
  r.labels = labels;
  r.confusion = cm;
  r.per_class = per_class_metrics(cm);
  r.accuracy = overall_accuracy(cm);
  r.weighted = weighted_average(r.per_class);
  r.macro = macro_average(r.per_class);
  r.total_support = cm.total();
  return r;
}

nlohmann::json report_metrics_json(const MetricsReport& report) {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t j = 0; j < report.labels.size(); ++j) {
    const auto& m = report.per_class[j];
    per_class[report.labels[j]] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < report.confusion.classes(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < report.confusion.classes(); ++j) row.push_back(report.confusion.at(i, j));
    rows.push_back(row);
  }
  return {{"accuracy", report.accuracy},
          {"per_class", per_class},
          {"weighted_avg", averages_json(report.weighted)},
          {"macro_avg", averages_json(report.macro)},
          {"total_support", report.total_support},
          {"labels", report.labels},
          {"confusion_matrix", rows}};
}

std::string format_report_table(const MetricsReport& report, bool macro) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s %10s\n", "", "precision", "recall", "f1-score",
                "support");
  out << line;
  for (std::size_t j = 0; j < report.labels.size(); ++j) {
    const auto& m = report.per_class[j];
    std::snprintf(line, sizeof(line), "%-10s %10.6f %10.6f %10.6f %10llu\n", report.labels[j].c_str(), m.precision,
                  m.recall, m.f1, static_cast<unsigned long long>(m.support));
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %10.6f %10llu\n", "accuracy", "", "", report.accuracy,
                static_cast<unsigned long long>(report.total_support));
  out << line;
  const AverageMetrics& avg = macro ? report.macro : report.weighted;
  std::snprintf(line, sizeof(line), "%-10s %10.6f %10.6f %10.6f %10llu\n", macro ? "macro avg" : "weighted",
                avg.precision, avg.recall, avg.f1, static_cast<unsigned long long>(report.total_support));
  out << line;
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& labels) {
  if (labels.size() != cm.classes()) throw SchemaError("confusion_csv: label count mismatch");
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    out << labels[i];
    for (std::size_t j = 0; j < cm.classes(); ++j) out << ',' << cm.at(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace saelstm
