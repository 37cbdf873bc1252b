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

#include "saelstm/dataflow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "saelstm/errors.hpp"
#include "saelstm/random.hpp"

namespace saelstm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// RFC 4180 fields: double quotes enclose, "" escapes. Embedded newlines are
// not supported.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  fields.emplace_back(trim(field));
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string json_kind(ColumnKind k) { return k == ColumnKind::kNumeric ? "numeric" : "categorical"; }

ColumnKind parse_kind(const std::string& s) {
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "categorical") return ColumnKind::kCategorical;
  throw SchemaError("unknown column kind '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------- schema

void FeatureSchema::validate() const {
  if (column_names.size() != column_kinds.size()) {
    throw SchemaError("schema lists " + std::to_string(column_names.size()) + " columns but " +
                      std::to_string(column_kinds.size()) + " kinds");
  }
  std::set<std::string> seen;
  for (const auto& name : column_names) {
    if (!seen.insert(name).second) throw SchemaError("duplicate column '" + name + "'");
  }
  const auto targets = std::count(column_names.begin(), column_names.end(), target_column);
  if (targets != 1) throw SchemaError("target column '" + target_column + "' must appear exactly once");
  if (column_names.size() - 1 != kFeatureWidth) {
    throw SchemaError("schema has " + std::to_string(column_names.size() - 1) + " feature columns, expected " +
                      std::to_string(kFeatureWidth));
  }
  if (class_labels.size() < 2) throw SchemaError("schema needs at least two class labels");
  for (std::size_t i = 1; i < class_labels.size(); ++i) {
    if (!(class_labels[i - 1] < class_labels[i])) {
      throw SchemaError("class labels must be distinct and in lexicographic order");
    }
  }
}

std::vector<std::string> FeatureSchema::feature_names() const {
  std::vector<std::string> out;
  for (const auto& name : column_names) {
    if (name != target_column) out.push_back(name);
  }
  return out;
}

std::vector<ColumnKind> FeatureSchema::feature_kinds() const {
  std::vector<ColumnKind> out;
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] != target_column) out.push_back(column_kinds[i]);
  }
  return out;
}

std::optional<std::size_t> FeatureSchema::class_index(std::string_view label) const {
  for (std::size_t i = 0; i < class_labels.size(); ++i) {
    if (class_labels[i] == label) return i;
  }
  return std::nullopt;
}

FeatureSchema FeatureSchema::ugransome() {
  using K = ColumnKind;
  FeatureSchema s;
  s.column_names = {"Time",       "Protcol", "Flag",          "Family",    "Clusters",
                    "SeddAddress", "ExpAddress", "BTC",        "USD",       "Netflow_Bytes",
                    "IPaddress",  "Threats", "Port",          "Prediction"};
  s.column_kinds = {K::kNumeric,     K::kCategorical, K::kCategorical, K::kCategorical, K::kNumeric,
                    K::kCategorical, K::kCategorical, K::kNumeric,     K::kNumeric,     K::kNumeric,
                    K::kCategorical, K::kCategorical, K::kNumeric,     K::kCategorical};
  s.target_column = "Prediction";
  s.class_labels = {"A", "S", "SS"};
  return s;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
  try {
    FeatureSchema s;
    for (const auto& col : j.at("columns")) {
      s.column_names.push_back(col.at("name").get<std::string>());
      s.column_kinds.push_back(parse_kind(col.at("kind").get<std::string>()));
    }
    s.target_column = j.at("target").get<std::string>();
    s.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    cols.push_back({{"name", column_names[i]}, {"kind", json_kind(column_kinds[i])}});
  }
  return {{"columns", cols}, {"target", target_column}, {"class_labels", class_labels}};
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------- parsing

RawTable RawTable::subset(std::span<const std::size_t> indices) const {
  RawTable out;
  out.columns.reserve(columns.size());
  for (const auto& col : columns) {
    RawColumn c{col.name, col.kind, {}, {}};
    for (std::size_t i : indices) {
      if (col.kind == ColumnKind::kNumeric) {
        c.numbers.push_back(col.numbers.at(i));
      } else {
        c.strings.push_back(col.strings.at(i));
      }
    }
    out.columns.push_back(std::move(c));
  }
  for (std::size_t i : indices) {
    out.labels.push_back(labels.at(i));
    out.source_lines.push_back(source_lines.at(i));
  }
  return out;
}

RawTable parse_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file " + path.string());
  return parse_csv(in, schema, path.string());
}

RawTable parse_csv(std::istream& in, const FeatureSchema& schema, std::string_view source) {
  schema.validate();
  const std::string src(source);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(src + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_csv_line(line);

  // Map each schema column onto its header position; extra header columns are ignored.
  std::vector<std::string> missing;
  std::vector<std::size_t> position(schema.column_names.size());
  for (std::size_t i = 0; i < schema.column_names.size(); ++i) {
    const auto it = std::find(header.begin(), header.end(), schema.column_names[i]);
    if (it == header.end()) {
      missing.push_back(schema.column_names[i]);
    } else {
      position[i] = static_cast<std::size_t>(it - header.begin());
    }
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw SchemaError(src + ": missing column(s): " + names);
  }

  RawTable table;
  std::size_t target_pos = 0;
  std::vector<std::size_t> feature_src;
  for (std::size_t i = 0; i < schema.column_names.size(); ++i) {
    if (schema.column_names[i] == schema.target_column) {
      target_pos = position[i];
      continue;
    }
    table.columns.push_back({schema.column_names[i], schema.column_kinds[i], {}, {}});
    feature_src.push_back(position[i]);
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(src + " line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    const auto cls = schema.class_index(fields[target_pos]);
    if (!cls) {
      throw DataError(src + " line " + std::to_string(line_no) + ": unknown target label '" + fields[target_pos] +
                      "'");
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      RawColumn& col = table.columns[c];
      const std::string& cell = fields[feature_src[c]];
      if (col.kind == ColumnKind::kNumeric) {
        const auto v = parse_number(cell);
        if (!v) {
          throw DataError(src + " line " + std::to_string(line_no) + ", column '" + col.name + "': cannot parse '" +
                          cell + "' as a number");
        }
        col.numbers.push_back(*v);
      } else {
        col.strings.push_back(cell);
      }
    }
    table.labels.push_back(static_cast<int>(*cls));
    table.source_lines.push_back(line_no);
  }
  return table;
}

RawTable drop_duplicate_rows(const RawTable& table) {
  std::set<std::string> seen;
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    std::string key;
    for (const auto& col : table.columns) {
      if (col.kind == ColumnKind::kNumeric) {
        key += format_double(col.numbers[r]);
      } else {
        key += col.strings[r];
      }
      key.push_back('\x1f');
    }
    key += std::to_string(table.labels[r]);
    if (seen.insert(std::move(key)).second) keep.push_back(r);
  }
  return table.subset(keep);
}

// ---------------------------------------------------------------- encoding

std::string_view to_string(UnknownPolicy policy) {
  return policy == UnknownPolicy::kStrict ? "strict" : "lenient";
}

UnknownPolicy parse_unknown_policy(std::string_view name) {
  if (name == "strict") return UnknownPolicy::kStrict;
  if (name == "lenient") return UnknownPolicy::kLenient;
  throw ConfigError("unknown vocabulary mode '" + std::string(name) + "' (expected strict or lenient)");
}

std::optional<int> VocabMap::code(const std::string& column, const std::string& value) const {
  const auto it = columns.find(column);
  if (it == columns.end()) return std::nullopt;
  const auto& values = it->second;
  const auto pos = std::lower_bound(values.begin(), values.end(), value);
  if (pos == values.end() || *pos != value) return std::nullopt;
  return static_cast<int>(pos - values.begin());
}

const std::string& VocabMap::decode(const std::string& column, int code) const {
  const auto it = columns.find(column);
  if (it == columns.end()) throw SchemaError("vocabulary has no column '" + column + "'");
  if (code < 0 || static_cast<std::size_t>(code) >= it->second.size()) {
    throw DomainError("code " + std::to_string(code) + " outside vocabulary of '" + column + "'");
  }
  return it->second[static_cast<std::size_t>(code)];
}

nlohmann::json VocabMap::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, values] : columns) j[name] = values;
  return j;
}

VocabMap VocabMap::from_json(const nlohmann::json& j) {
  VocabMap v;
  for (const auto& [name, values] : j.items()) {
    auto list = values.get<std::vector<std::string>>();
    if (!std::is_sorted(list.begin(), list.end()) ||
        std::adjacent_find(list.begin(), list.end()) != list.end()) {
      throw FormatError("vocabulary for '" + name + "' is not strictly sorted");
    }
    v.columns[name] = std::move(list);
  }
  return v;
}

VocabMap build_vocab(const RawTable& table) {
  VocabMap vocab;
  for (const auto& col : table.columns) {
    if (col.kind != ColumnKind::kCategorical) continue;
    std::set<std::string> uniq(col.strings.begin(), col.strings.end());
    vocab.columns[col.name] = std::vector<std::string>(uniq.begin(), uniq.end());
  }
  return vocab;
}

ExampleTable ExampleTable::subset(std::span<const std::size_t> indices) const {
  ExampleTable out;
  out.features = Matrix(indices.size(), features.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = features.row(indices[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels.at(indices[i]));
  }
  return out;
}

std::pair<ExampleTable, VocabMap> encode_categoricals(const RawTable& table, const VocabMap* vocab,
                                                      UnknownPolicy policy) {
  VocabMap used = vocab ? *vocab : build_vocab(table);
  ExampleTable out;
  out.features = Matrix(table.rows(), table.columns.size());
  out.labels = table.labels;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const RawColumn& col = table.columns[c];
    if (col.kind == ColumnKind::kNumeric) {
      for (std::size_t r = 0; r < table.rows(); ++r) out.features(r, c) = col.numbers[r];
      continue;
    }
    const auto it = used.columns.find(col.name);
    if (it == used.columns.end()) throw SchemaError("vocabulary has no column '" + col.name + "'");
    const auto& values = it->second;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      const auto pos = std::lower_bound(values.begin(), values.end(), col.strings[r]);
      if (pos != values.end() && *pos == col.strings[r]) {
        out.features(r, c) = static_cast<double>(pos - values.begin());
      } else if (policy == UnknownPolicy::kLenient) {
        out.features(r, c) = static_cast<double>(values.size());
      } else {
        const std::string where =
            table.source_lines.size() > r ? "line " + std::to_string(table.source_lines[r]) : "row " + std::to_string(r);
        throw DataError(where + ", column '" + col.name + "': value '" + col.strings[r] +
                        "' is not in the vocabulary");
      }
    }
  }
  return {std::move(out), std::move(used)};
}

// ---------------------------------------------------------------- normalization

nlohmann::json NormStats::to_json() const { return {{"min", min}, {"max", max}}; }

NormStats NormStats::from_json(const nlohmann::json& j) {
  NormStats s{j.at("min").get<Vector>(), j.at("max").get<Vector>()};
  if (s.min.size() != s.max.size()) throw FormatError("normalization stats have mismatched lengths");
  return s;
}

std::pair<Matrix, NormStats> minmax_normalize(const Matrix& table, const NormStats* stats) {
  NormStats used;
  if (stats) {
    if (stats->min.size() != table.cols() || stats->max.size() != table.cols()) {
      throw ShapeError("normalization stats cover " + std::to_string(stats->min.size()) + " columns, table has " +
                       std::to_string(table.cols()));
    }
    used = *stats;
  } else {
    used.min.assign(table.cols(), 0.0);
    used.max.assign(table.cols(), 0.0);
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (table.rows() == 0) break;
      double lo = table(0, c);
      double hi = lo;
      for (std::size_t r = 1; r < table.rows(); ++r) {
        lo = std::min(lo, table(r, c));
        hi = std::max(hi, table(r, c));
      }
      used.min[c] = lo;
      used.max[c] = hi;
    }
  }

  Matrix out(table.rows(), table.cols());
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const double lo = used.min[c];
    const double range = used.max[c] - lo;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      double v = range > 0.0 ? (table(r, c) - lo) / range : 0.0;
      if (stats) v = std::clamp(v, 0.0, 1.0);
      out(r, c) = v;
    }
  }
  return {std::move(out), std::move(used)};
}

// ---------------------------------------------------------------- splitting

SplitIndices stratified_split_indices(std::span<const int> labels, std::size_t num_classes, double test_fraction,
                                      std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie strictly between 0 and 1");
  }
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw DataError("label " + std::to_string(y) + " at row " + std::to_string(i) + " is out of range");
    }
    by_class[static_cast<std::size_t>(y)].push_back(i);
  }

  SplitIndices split;
  for (std::size_t k = 0; k < num_classes; ++k) {
    auto& rows = by_class[k];
    if (rows.size() < 2) {
      throw DataError("class " + std::to_string(k) + " has " + std::to_string(rows.size()) +
                      " row(s); stratified split needs at least 2");
    }
    // nearbyint rounds half to even under the default rounding mode.
    auto n_test = static_cast<std::size_t>(std::nearbyint(static_cast<double>(rows.size()) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    Rng rng(derive_seed(seed, k));
    rng.shuffle(rows);
    split.test.insert(split.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::pair<ExampleTable, ExampleTable> stratified_split(const ExampleTable& table, std::size_t num_classes,
                                                       double test_fraction, std::uint64_t seed) {
  const SplitIndices idx = stratified_split_indices(table.labels, num_classes, test_fraction, seed);
  return {table.subset(idx.train), table.subset(idx.test)};
}

std::vector<std::size_t> class_counts(std::span<const int> labels, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw DomainError("label " + std::to_string(y) + " is out of range");
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

ClassDistribution class_distribution(const std::vector<std::vector<int>>& subsets, std::size_t num_classes) {
  ClassDistribution d;
  d.totals.assign(num_classes, 0);
  d.means.assign(num_classes, 0.0);
  for (const auto& labels : subsets) {
    d.per_subset.push_back(class_counts(labels, num_classes));
    for (std::size_t k = 0; k < num_classes; ++k) d.totals[k] += d.per_subset.back()[k];
  }
  if (!subsets.empty()) {
    for (std::size_t k = 0; k < num_classes; ++k) {
      d.means[k] = static_cast<double>(d.totals[k]) / static_cast<double>(subsets.size());
    }
  }
  return d;
}

// ---------------------------------------------------------------- manifest

nlohmann::json PreprocessManifest::to_json() const {
  return {{"schema", schema.to_json()},
          {"vocab", vocab.to_json()},
          {"norm_stats", stats.to_json()},
          {"unknown_policy", std::string(to_string(unknown_policy))},
          {"split_seed", split_seed},
          {"test_fraction", test_fraction},
          {"drop_duplicates", drop_duplicates},
          {"rows", {{"total", rows_total}, {"train", rows_train}, {"test", rows_test}}},
          {"class_counts", {{"train", train_class_counts}, {"test", test_class_counts}}}};
}

PreprocessManifest PreprocessManifest::from_json(const nlohmann::json& j) {
  try {
    PreprocessManifest m;
    m.schema = FeatureSchema::from_json(j.at("schema"));
    m.vocab = VocabMap::from_json(j.at("vocab"));
    m.stats = NormStats::from_json(j.at("norm_stats"));
    m.unknown_policy = parse_unknown_policy(j.at("unknown_policy").get<std::string>());
    m.split_seed = j.at("split_seed").get<std::uint64_t>();
    m.test_fraction = j.at("test_fraction").get<double>();
    m.drop_duplicates = j.at("drop_duplicates").get<bool>();
    m.rows_total = j.at("rows").at("total").get<std::size_t>();
    m.rows_train = j.at("rows").at("train").get<std::size_t>();
    m.rows_test = j.at("rows").at("test").get<std::size_t>();
    m.train_class_counts = j.at("class_counts").at("train").get<std::vector<std::size_t>>();
    m.test_class_counts = j.at("class_counts").at("test").get<std::vector<std::size_t>>();
    if (m.stats.min.size() != kFeatureWidth) throw FormatError("manifest normalization stats have wrong width");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed preprocessing manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed preprocessing manifest: ") + e.what());
  } catch (const SchemaError& e) {
    throw FormatError(std::string("malformed preprocessing manifest: ") + e.what());
  }
}

void PreprocessManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << to_json().dump(2) << '\n';
}

PreprocessManifest PreprocessManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

PreprocessResult preprocess(const RawTable& input, const FeatureSchema& schema, const PreprocessOptions& options) {
  schema.validate();
  const RawTable table = options.drop_duplicates ? drop_duplicate_rows(input) : input;
  const SplitIndices split =
      stratified_split_indices(table.labels, schema.num_classes(), options.test_fraction, options.split_seed);
  const RawTable raw_train = table.subset(split.train);
  const RawTable raw_test = table.subset(split.test);

  auto [train_coded, vocab] = encode_categoricals(raw_train);
  auto [test_coded, unused] = encode_categoricals(raw_test, &vocab, options.unknown_policy);
  auto [train_norm, stats] = minmax_normalize(train_coded.features);
  auto [test_norm, same] = minmax_normalize(test_coded.features, &stats);

  PreprocessResult r;
  r.train = {std::move(train_norm), std::move(train_coded.labels)};
  r.test = {std::move(test_norm), std::move(test_coded.labels)};
  PreprocessManifest& m = r.manifest;
  m.schema = schema;
  m.vocab = std::move(vocab);
  m.stats = std::move(stats);
  m.unknown_policy = options.unknown_policy;
  m.split_seed = options.split_seed;
  m.test_fraction = options.test_fraction;
  m.drop_duplicates = options.drop_duplicates;
  m.rows_total = table.rows();
  m.rows_train = r.train.rows();
  m.rows_test = r.test.rows();
  m.train_class_counts = class_counts(r.train.labels, schema.num_classes());
  m.test_class_counts = class_counts(r.test.labels, schema.num_classes());
  return r;
}

ExampleTable apply_manifest(const RawTable& table, const PreprocessManifest& manifest) {
  auto [coded, vocab] = encode_categoricals(table, &manifest.vocab, manifest.unknown_policy);
  auto [norm, stats] = minmax_normalize(coded.features, &manifest.stats);
  return {std::move(norm), std::move(coded.labels)};
}

// ---------------------------------------------------------------- example tables

void write_example_table(const std::filesystem::path& path, const ExampleTable& table,
                         const std::vector<std::string>& feature_names) {
  if (feature_names.size() != table.features.cols()) {
    throw SchemaError("example table has " + std::to_string(table.features.cols()) + " columns but " +
                      std::to_string(feature_names.size()) + " names");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& name : feature_names) out << name << ',';
  out << "label\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (double v : table.features.row(r)) out << format_double(v) << ',';
    out << table.labels[r] << '\n';
  }
}

ExampleTable read_example_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": missing header row");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "label") {
    throw SchemaError(path.string() + ": last column must be 'label'");
  }
  const std::size_t width = header.size() - 1;
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(path.string() + " line " + std::to_string(line_no) + ": wrong field count");
    }
    for (std::size_t c = 0; c <= width; ++c) {
      const auto v = parse_number(fields[c]);
      if (!v) throw DataError(path.string() + " line " + std::to_string(line_no) + ": cannot parse '" + fields[c] + "'");
      if (c < width) {
        values.push_back(*v);
      } else {
        labels.push_back(static_cast<int>(*v));
      }
    }
  }
  return {Matrix(labels.size(), width, std::move(values)), std::move(labels)};
}

}  // namespace saelstm
