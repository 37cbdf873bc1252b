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
#include <numeric>

#include "saelstm/errors.hpp"
#include "saelstm/sae.hpp"
#include "saelstm/synthetic.hpp"
#include "support.hpp"

using namespace saelstm;
using saelstm::testing::random_vector;

namespace {

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::to_string(i));
  return out;
}

double score_sum(const std::vector<FeatureScore>& scores) {
  double s = 0.0;
  for (const auto& f : scores) s += f.score;
  return s;
}

}  // namespace

TEST_CASE("build_sae shapes and parameter counts") {
  const SaeModel m = build_sae(42);
  REQUIRE(m.layers.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(m.layers[i].fan_in() == kSaeWidths[i]);
    CHECK(m.layers[i].fan_out() == kSaeWidths[i + 1]);
    CHECK(m.layers[i].activation == (i == 5 ? Activation::kIdentity : Activation::kRelu));
  }
  const auto descriptors = m.descriptors();
  const ParamCount pc = count_params(descriptors);
  CHECK(pc.per_layer == std::vector<std::size_t>{1050, 3800, 663, 700, 3825, 988});
  CHECK(pc.total == 11026);
  CHECK(m.param_count() == 11026);
  CHECK(m.latent_width() == 13);
  CHECK(build_sae(42) == m);
  CHECK_FALSE(build_sae(43) == m);
  for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(build_sae(seed).param_count() == 11026);
}

TEST_CASE("encode, decode and reconstruct") {
  const SaeModel m = build_sae(7);
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_vector(rng, 13);
    const Vector z = encode(m, x);
    CHECK(z.size() == 13);
    Vector manual = x;
    for (std::size_t i = 0; i < kSaeEncoderLayers; ++i) manual = dense_forward(m.layers[i], manual);
    CHECK(z == manual);
    const Vector r = reconstruct(m, x);
    CHECK(r == decode(m, z));
    CHECK(all_finite(r));
  }
  CHECK_THROWS_AS(encode(m, Vector(12, 0.0)), ShapeError);

  Matrix rows(4, 13);
  for (double& v : rows.values()) v = rng.uniform01();
  const Matrix z = encode(m, rows);
  for (std::size_t r = 0; r < 4; ++r) CHECK(Vector(z.row(r).begin(), z.row(r).end()) == encode(m, rows.row(r)));

  SaeModel zero = m;
  for (std::size_t i = 0; i < kSaeEncoderLayers; ++i) {
    for (double& w : zero.layers[i].weights.values()) w = 0.0;
  }
  for (double v : encode(zero, random_vector(rng, 13))) CHECK(v == 0.0);
}

TEST_CASE("encoder_backward matches central differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    SaeModel m = build_sae(seed);
    Rng rng(derive_seed(seed, 9));
    for (auto& l : m.layers) {
      for (double& b : l.bias) b = rng.uniform(-0.1, 0.1);
    }
    Vector x = random_vector(rng, 13);
    for (double& v : x) v = std::abs(v);
    const Vector up = random_vector(rng, 13);
    auto f = [&] {
      const Vector z = encode(m, x);
      return std::inner_product(z.begin(), z.end(), up.begin(), 0.0);
    };
    std::vector<DenseGrads> grads;
    for (std::size_t i = 0; i < kSaeEncoderLayers; ++i) {
      grads.push_back({{}, Matrix(m.layers[i].fan_out(), m.layers[i].fan_in()), Vector(m.layers[i].fan_out(), 0.0)});
    }
    encoder_backward(m, encoder_forward(m, x), up, grads);
    for (std::size_t i = 0; i < kSaeEncoderLayers; ++i) {
      CHECK(saelstm::testing::max_fd_error(m.layers[i].weights.values(), grads[i].grad_weights.values(), f) < 1e-5);
      CHECK(saelstm::testing::max_fd_error(m.layers[i].bias, grads[i].grad_bias, f) < 1e-5);
    }
  }
}

TEST_CASE("reconstruction loss through all six layers matches central differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    SaeModel m = build_sae(seed + 100);
    Rng rng(derive_seed(seed, 10));
    Vector x(13);
    for (double& v : x) v = rng.uniform01();
    auto f = [&] { return mse_loss(reconstruct(m, x), x).loss; };

    std::vector<Vector> acts{x};
    for (const auto& l : m.layers) acts.push_back(dense_forward(l, acts.back()));
    Vector up = mse_loss(acts.back(), x).grad;
    for (std::size_t i = m.layers.size(); i-- > 0;) {
      const DenseGrads g = dense_backward(m.layers[i], acts[i], up);
      CHECK(saelstm::testing::max_fd_error(m.layers[i].weights.values(), g.grad_weights.values(), f) < 1e-5);
      up = g.grad_x;
    }
  }
}

TEST_CASE("train_sae") {
  const Matrix table = low_rank_table(400, 13, 3, 0.01, 17);

  SUBCASE("zero epochs is a no-op") {
    SaeModel m = build_sae(1);
    const SaeModel before = m;
    const TrainHistory h = train_sae(m, table, SaeTrainConfig{.epochs = 0});
    CHECK(h.epochs_completed() == 0);
    CHECK(m == before);
  }

  SUBCASE("deterministic") {
    SaeModel a = build_sae(3);
    SaeModel b = build_sae(3);
    const TrainHistory ha = train_sae(a, table, SaeTrainConfig{.epochs = 3, .seed = 5});
    const TrainHistory hb = train_sae(b, table, SaeTrainConfig{.epochs = 3, .seed = 5});
    CHECK(a == b);
    CHECK(ha.epoch_loss == hb.epoch_loss);
  }

  SUBCASE("learns a low-rank table with a non-increasing moving average") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CAPTURE(seed);
      SaeModel m = build_sae(seed);
      const TrainHistory h = train_sae(m, low_rank_table(400, 13, 5, 0.05, 17 + seed), SaeTrainConfig{.epochs = 50});
      REQUIRE(h.epochs_completed() == 50);
      CHECK(h.epoch_seconds.size() == 50);
      for (double l : h.epoch_loss) CHECK(std::isfinite(l));
      CHECK(h.epoch_loss.back() < 0.1 * h.epoch_loss.front());
      double prev = INFINITY;
      for (std::size_t e = 4; e < h.epoch_loss.size(); ++e) {
        const double avg = std::accumulate(h.epoch_loss.begin() + static_cast<std::ptrdiff_t>(e - 4),
                                           h.epoch_loss.begin() + static_cast<std::ptrdiff_t>(e + 1), 0.0) / 5.0;
        CHECK(avg <= prev);
        prev = avg;
      }
    }
  }

  SUBCASE("constant dataset is reconstructed") {
    Matrix c(200, 13);
    for (std::size_t r = 0; r < c.rows(); ++r) {
      for (std::size_t j = 0; j < 13; ++j) c(r, j) = 0.1 + 0.06 * static_cast<double>(j);
    }
    SaeModel m = build_sae(4);
    train_sae(m, c, SaeTrainConfig{.epochs = 50});
    const Vector out = reconstruct(m, c.row(0));
    double err = 0.0;
    for (std::size_t j = 0; j < 13; ++j) err += std::abs(out[j] - c(0, j));
    CHECK(err / 13.0 < 0.05);
  }

  SUBCASE("layerwise mode trains every pair") {
    SaeModel m = build_sae(5);
    const TrainHistory h = train_sae(m, table, SaeTrainConfig{.epochs = 4, .layerwise = true});
    CHECK(h.epochs_completed() == 12);
    CHECK_FALSE(m == build_sae(5));
  }

  SUBCASE("non-finite input is a numeric failure naming epoch and batch") {
    Matrix bad = table;
    bad(0, 0) = INFINITY;
    SaeModel m = build_sae(6);
    try {
      train_sae(m, bad, SaeTrainConfig{.epochs = 1});
      FAIL("expected NumericFailure");
    } catch (const NumericFailure& e) {
      const std::string msg = e.what();
      CHECK(msg.find("epoch") != std::string::npos);
      CHECK(msg.find("batch") != std::string::npos);
    }
  }

  SUBCASE("wrong width") {
    SaeModel m = build_sae(6);
    CHECK_THROWS_AS(train_sae(m, Matrix(5, 12), SaeTrainConfig{.epochs = 1}), ShapeError);
  }
}

TEST_CASE("feature_importance") {
  SUBCASE("hand example") {
    SaeModel m;
    m.layers.push_back({Matrix(2, 2, {1, -2, 0, 2}), Vector(2, 0.0), Activation::kRelu});
    const auto s = feature_importance(m, {"a", "b"});
    REQUIRE(s.size() == 2);
    CHECK(s[0].name == "b");
    CHECK(s[0].score == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(s[1].score == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("zero column ranks last, identical columns tie") {
    SaeModel m = build_sae(8);
    for (std::size_t k = 0; k < 75; ++k) m.layers[0].weights(k, 4) = 0.0;
    const auto s = feature_importance(m, names(13));
    CHECK(s.back().column == 4);
    CHECK(s.back().score == 0.0);

    for (std::size_t k = 0; k < 75; ++k) {
      const double w = m.layers[0].weights(k, 1) + 0.5;
      for (std::size_t j = 0; j < 13; ++j) m.layers[0].weights(k, j) = w;
    }
    const auto even = feature_importance(m, names(13));
    for (std::size_t i = 0; i < 13; ++i) {
      CHECK(even[i].score == doctest::Approx(1.0 / 13.0).epsilon(1e-15));
      CHECK(even[i].column == i);
    }
  }
  SUBCASE("normalization and permutation equivariance") {
    for (ImportanceMethod method : {ImportanceMethod::kWeights, ImportanceMethod::kActivations}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CAPTURE(seed);
        const SaeModel m = build_sae(seed);
        Rng rng(seed);
        const Matrix data = low_rank_table(30, 13, 2, 0.05, seed);
        const auto base = feature_importance(m, names(13), method, &data);
        CHECK(std::abs(score_sum(base) - 1.0) <= 1e-12);
        for (const auto& f : base) CHECK(f.score >= 0.0);

        std::vector<std::size_t> perm(13);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        SaeModel pm = m;
        Matrix pdata(data.rows(), 13);
        std::vector<std::string> pnames(13);
        for (std::size_t j = 0; j < 13; ++j) {
          pnames[j] = "f" + std::to_string(perm[j]);
          for (std::size_t k = 0; k < 75; ++k) pm.layers[0].weights(k, j) = m.layers[0].weights(k, perm[j]);
          for (std::size_t r = 0; r < data.rows(); ++r) pdata(r, j) = data(r, perm[j]);
        }
        const auto permuted = feature_importance(pm, pnames, method, &pdata);
        for (const auto& f : permuted) {
          const auto it = std::find_if(base.begin(), base.end(), [&](const FeatureScore& b) { return b.name == f.name; });
          REQUIRE(it != base.end());
          CHECK(std::abs(it->score - f.score) <= 1e-12);
        }
      }
    }
  }
  SUBCASE("errors") {
    const SaeModel m = build_sae(1);
    CHECK_THROWS_AS(feature_importance(m, names(12)), SchemaError);
    CHECK_THROWS_AS(feature_importance(m, names(13), ImportanceMethod::kActivations), DomainError);
    CHECK(parse_importance_method("activations") == ImportanceMethod::kActivations);
    CHECK_THROWS_AS(parse_importance_method("gain"), ConfigError);
  }
}
