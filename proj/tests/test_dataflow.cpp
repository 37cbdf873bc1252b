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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "saelstm/dataflow.hpp"
#include "saelstm/errors.hpp"
#include "saelstm/random.hpp"
#include "saelstm/synthetic.hpp"
#include "support.hpp"

using namespace saelstm;

namespace {

const char* kHeader =
    "Time,Protcol,Flag,Family,Clusters,SeddAddress,ExpAddress,BTC,USD,Netflow_Bytes,IPaddress,Threats,Port,"
    "Prediction\n";

std::string row(const std::string& label, const std::string& threat = "DoS", double btc = 10.0, int time = 5) {
  std::ostringstream s;
  s << time << ",TCP,A,Locky,1,1AbC,1XyZ," << btc << ",500,300,A," << threat << ",5062," << label << "\n";
  return s.str();
}

RawTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, FeatureSchema::ugransome(), "test.csv");
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

// round-half-even(n * f), clamped to [1, n - 1], enumerated by hand.
std::size_t expected_test_rows(std::size_t n, double f) {
  const double x = static_cast<double>(n) * f;
  double r = std::floor(x);
  const double frac = x - r;
  if (frac > 0.5 || (frac == 0.5 && std::fmod(r, 2.0) != 0.0)) r += 1.0;
  return std::clamp<std::size_t>(static_cast<std::size_t>(r), 1, n - 1);
}

}  // namespace

TEST_CASE("schema") {
  const FeatureSchema s = FeatureSchema::ugransome();
  CHECK_NOTHROW(s.validate());
  CHECK(s.column_names.size() == 14);
  CHECK(s.feature_names().size() == kFeatureWidth);
  CHECK(s.class_labels == std::vector<std::string>{"A", "S", "SS"});
  CHECK(FeatureSchema::from_json(s.to_json()) == s);

  FeatureSchema bad = s;
  bad.class_labels = {"S", "A", "SS"};
  CHECK_THROWS_AS(bad.validate(), SchemaError);
  bad = s;
  bad.column_names.pop_back();
  bad.column_kinds.pop_back();
  CHECK_THROWS_AS(bad.validate(), SchemaError);
}

TEST_CASE("parse_csv") {
  SUBCASE("five valid rows") {
    const RawTable t = parse(std::string(kHeader) + row("A") + row("S") + row("SS") + row("A") + row("S"));
    CHECK(t.rows() == 5);
    CHECK(t.columns.size() == kFeatureWidth);
    CHECK(t.labels == std::vector<int>{0, 1, 2, 0, 1});
  }
  SUBCASE("unknown target label cites the line") {
    const std::string msg = error_of([] { parse(std::string(kHeader) + row("A") + row("X")); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK_THROWS_AS(parse(std::string(kHeader) + row("X")), DataError);
  }
  SUBCASE("missing column is named") {
    std::string text = "Time,Protcol,Flag,Family,Clusters,SeddAddress,ExpAddress,BTC,USD,Netflow_Bytes,IPaddress,"
                       "Threats,Prediction\n";
    CHECK_THROWS_AS(parse(text), SchemaError);
    CHECK(error_of([&] { parse(text); }).find("Port") != std::string::npos);
  }
  SUBCASE("unparseable number cites line and column") {
    std::string bad = row("A");
    bad.replace(bad.find(",500,"), 5, ",abc,");
    const std::string msg = error_of([&] { parse(std::string(kHeader) + bad); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("USD") != std::string::npos);
  }
  SUBCASE("quoted fields, BOM and extra columns") {
    const std::string text = "\xEF\xBB\xBF" + std::string("Extra,") + kHeader +
                             "junk,1,TCP,A,Locky,1,\"1Ab,C\",1XyZ,10,500,300,A,\"Port Scanning\",5062,A\n";
    const RawTable t = parse(text);
    REQUIRE(t.rows() == 1);
    CHECK(t.columns[5].strings[0] == "1Ab,C");
  }
  SUBCASE("wrong field count") { CHECK_THROWS_AS(parse(std::string(kHeader) + "1,2,3\n"), DataError); }
}

TEST_CASE("class histogram of a file with the UGRansome19Train counts") {
  const std::vector<std::size_t> counts{40323, 25822, 9656};
  const std::vector<std::string> labels{"A", "S", "SS"};
  std::string text = kHeader;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::string line = row(labels[k]);
    for (std::size_t i = 0; i < counts[k]; ++i) text += line;
  }
  const RawTable t = parse(text);
  CHECK(class_counts(t.labels, 3) == counts);
}

TEST_CASE("encode_categoricals") {
  const RawTable t = parse(std::string(kHeader) + row("A", "Spam") + row("S", "Blacklist") + row("SS", "DoS"));
  auto [coded, vocab] = encode_categoricals(t);
  CHECK(vocab.columns.at("Threats") == std::vector<std::string>{"Blacklist", "DoS", "Spam"});
  const std::size_t threats = 11;
  CHECK(coded.features(0, threats) == 2.0);
  CHECK(coded.features(1, threats) == 0.0);
  CHECK(coded.features(2, threats) == 1.0);

  auto [again, vocab2] = encode_categoricals(t, &vocab);
  CHECK(again.features == coded.features);
  CHECK(vocab2 == vocab);

  for (const auto& [col, values] : vocab.columns) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      CHECK(vocab.code(col, values[i]) == static_cast<int>(i));
      CHECK(vocab.decode(col, static_cast<int>(i)) == values[i]);
    }
  }

  const RawTable unseen = parse(std::string(kHeader) + row("A", "UDP scan"));
  auto [lenient, v3] = encode_categoricals(unseen, &vocab, UnknownPolicy::kLenient);
  CHECK(lenient.features(0, threats) == 3.0);
  CHECK_THROWS_AS(encode_categoricals(unseen, &vocab, UnknownPolicy::kStrict), DataError);
  CHECK(parse_unknown_policy("strict") == UnknownPolicy::kStrict);
  CHECK_THROWS_AS(parse_unknown_policy("loose"), ConfigError);
}

TEST_CASE("minmax_normalize") {
  auto [n, stats] = minmax_normalize(Matrix(3, 2, {2, 7, 4, 7, 6, 7}));
  CHECK(n == Matrix(3, 2, {0, 0, 0.5, 0, 1, 0}));
  CHECK(stats.min == Vector{2, 7});
  CHECK(stats.max == Vector{6, 7});

  const NormStats fixed{{0.0}, {10.0}};
  CHECK(minmax_normalize(Matrix(3, 1, {15, -5, 2.5}), &fixed).first == Matrix(3, 1, {1.0, 0.0, 0.25}));

  Rng rng(3);
  const Matrix m = saelstm::testing::random_matrix(rng, 50, 4, 100.0);
  const Matrix out = minmax_normalize(m).first;
  for (double v : out.values()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("stratified split") {
  SUBCASE("100 rows per class at 0.2") {
    std::vector<int> labels;
    for (int k = 0; k < 3; ++k) labels.insert(labels.end(), 100, k);
    const SplitIndices s = stratified_split_indices(labels, 3, 0.2, 42);
    std::vector<int> test_labels;
    for (auto i : s.test) test_labels.push_back(labels[i]);
    CHECK(class_counts(test_labels, 3) == std::vector<std::size_t>{20, 20, 20});
    const SplitIndices again = stratified_split_indices(labels, 3, 0.2, 42);
    CHECK(again.test == s.test);
    CHECK(again.train == s.train);
    CHECK_FALSE(stratified_split_indices(labels, 3, 0.2, 43).test == s.test);
  }
  SUBCASE("class sizes 10, 11, 12 at 0.2") {
    std::vector<int> labels;
    labels.insert(labels.end(), 10, 0);
    labels.insert(labels.end(), 11, 1);
    labels.insert(labels.end(), 12, 2);
    const SplitIndices s = stratified_split_indices(labels, 3, 0.2, 1);
    std::vector<int> test_labels;
    for (auto i : s.test) test_labels.push_back(labels[i]);
    CHECK(class_counts(test_labels, 3) ==
          std::vector<std::size_t>{expected_test_rows(10, 0.2), expected_test_rows(11, 0.2), expected_test_rows(12, 0.2)});
    CHECK(class_counts(test_labels, 3) == std::vector<std::size_t>{2, 2, 2});
  }
  SUBCASE("partition and proportion properties on random labels") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const std::size_t n = 20 + rng.index(400);
      std::vector<int> labels(n);
      for (auto& y : labels) y = static_cast<int>(rng.index(3));
      for (int k = 0; k < 3; ++k) labels[static_cast<std::size_t>(k) * 2] = labels[static_cast<std::size_t>(k) * 2 + 1] = k;
      const double f = rng.uniform(0.05, 0.95);
      const SplitIndices s = stratified_split_indices(labels, 3, f, seed);
      CHECK(s.train.size() + s.test.size() == n);
      std::set<std::size_t> all(s.train.begin(), s.train.end());
      all.insert(s.test.begin(), s.test.end());
      CHECK(all.size() == n);
      const auto totals = class_counts(labels, 3);
      std::vector<int> test_labels;
      for (auto i : s.test) test_labels.push_back(labels[i]);
      const auto tested = class_counts(test_labels, 3);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(tested[k] == expected_test_rows(totals[k], f));
        CHECK(std::abs(static_cast<double>(tested[k]) - f * static_cast<double>(totals[k])) <= 1.0);
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(stratified_split_indices(std::vector<int>{0, 0, 1}, 2, 0.5, 1), DataError);
    CHECK_THROWS_AS(stratified_split_indices(std::vector<int>{0, 0, 1, 1}, 2, 1.5, 1), ConfigError);
    CHECK_THROWS_AS(stratified_split_indices(std::vector<int>{0, 0, 1, 1}, 2, 0.0, 1), ConfigError);
  }
}

TEST_CASE("class_distribution over the three UGRansome subsets") {
  // Subset columns: UGRansome19Train, UGRansome19Test, UGRansomeEdition.
  const std::vector<std::vector<std::size_t>> counts{{40323, 25822, 9656}, {11869, 9439, 1736}, {4701, 3408, 6954}};
  std::vector<std::vector<int>> subsets;
  for (const auto& c : counts) {
    std::vector<int> labels;
    for (int k = 0; k < 3; ++k) labels.insert(labels.end(), c[static_cast<std::size_t>(k)], k);
    subsets.push_back(std::move(labels));
  }
  const ClassDistribution d = class_distribution(subsets, 3);
  CHECK(d.totals == std::vector<std::size_t>{56893, 38669, 18346});
  CHECK(d.means[0] == doctest::Approx(18964.333333).epsilon(1e-9));
  CHECK(d.means[1] == doctest::Approx(12889.666667).epsilon(1e-9));
  CHECK(d.means[2] == doctest::Approx(6115.333333).epsilon(1e-9));

  const ClassDistribution empty = class_distribution({{}}, 3);
  CHECK(empty.totals == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("preprocess fits on train only and is deterministic") {
  std::istringstream in(synthetic_ugransome_csv(600, 3));
  const RawTable raw = parse_csv(in, FeatureSchema::ugransome());
  const PreprocessOptions opts;
  const PreprocessResult a = preprocess(raw, FeatureSchema::ugransome(), opts);
  const PreprocessResult b = preprocess(raw, FeatureSchema::ugransome(), opts);
  CHECK(a.train.features == b.train.features);
  CHECK(a.test.features == b.test.features);
  CHECK(a.manifest == b.manifest);
  CHECK(a.train.rows() + a.test.rows() == 600);

  // Training columns span [0, 1] exactly; test values stay inside after clipping.
  for (std::size_t c = 0; c < kFeatureWidth; ++c) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t r = 0; r < a.train.rows(); ++r) {
      lo = std::min(lo, a.train.features(r, c));
      hi = std::max(hi, a.train.features(r, c));
    }
    CHECK(lo == 0.0);
    if (a.manifest.stats.max[c] > a.manifest.stats.min[c]) CHECK(hi == 1.0);
  }
  for (double v : a.test.features.values()) CHECK((v >= 0.0 && v <= 1.0));

  // The inference path reproduces the test encoding from the manifest alone.
  const SplitIndices split = stratified_split_indices(raw.labels, 3, opts.test_fraction, opts.split_seed);
  const ExampleTable replay = apply_manifest(raw.subset(split.test), a.manifest);
  CHECK(replay.features == a.test.features);

  const PreprocessManifest round = PreprocessManifest::from_json(a.manifest.to_json());
  CHECK(round == a.manifest);
}

TEST_CASE("manifest and example table files") {
  const auto dir = saelstm::testing::scratch_dir("dataflow");
  std::istringstream in(synthetic_ugransome_csv(200, 4));
  const RawTable raw = parse_csv(in, FeatureSchema::ugransome());
  const PreprocessResult r = preprocess(raw, FeatureSchema::ugransome(), PreprocessOptions{});
  r.manifest.save(dir / "manifest.json");
  CHECK(PreprocessManifest::load(dir / "manifest.json") == r.manifest);
  write_example_table(dir / "train.csv", r.train, r.manifest.schema.feature_names());
  const ExampleTable back = read_example_table(dir / "train.csv");
  CHECK(back.features == r.train.features);
  CHECK(back.labels == r.train.labels);

  std::ofstream(dir / "broken.json") << "{\"schema\": 3}";
  CHECK_THROWS_AS(PreprocessManifest::load(dir / "broken.json"), FormatError);
}

TEST_CASE("drop_duplicate_rows keeps the first occurrence") {
  const RawTable t = parse(std::string(kHeader) + row("A") + row("A") + row("S") + row("A", "Spam"));
  const RawTable d = drop_duplicate_rows(t);
  CHECK(d.rows() == 3);
  CHECK(d.source_lines == std::vector<std::size_t>{2, 4, 5});
}
