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

#include "saelstm/errors.hpp"
#include "saelstm/lstm.hpp"
#include "saelstm/synthetic.hpp"
#include "support.hpp"

using namespace saelstm;
using saelstm::testing::max_fd_error;
using saelstm::testing::random_matrix;
using saelstm::testing::random_vector;

namespace {

LstmClassifier random_classifier(std::uint64_t seed, std::size_t input, std::size_t units, std::size_t classes,
                                 std::size_t depth = 1) {
  LstmClassifier m = build_classifier(input, units, classes, seed, depth);
  Rng rng(derive_seed(seed, 77));
  for (auto& cell : m.layers) {
    for (double& b : cell.bias) b = rng.uniform(-0.5, 0.5);
    for (double& w : cell.recurrent_weights.values()) w *= 2.0;
  }
  for (double& b : m.head.bias) b = rng.uniform(-0.5, 0.5);
  return m;
}

double loss_of(const LstmClassifier& m, const Matrix& seq, std::size_t cls) {
  return sparse_cce_loss(lstm_forward(m, seq).probs, cls).loss;
}

double sequence_accuracy(const LstmClassifier& m, const Matrix& x, const std::vector<int>& y) {
  const auto preds = predict_table(m, x);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += static_cast<int>(preds[i].label) == y[i];
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("lstm_cell_forward hand cases") {
  LstmCell zero{3, 4, Matrix(16, 3), Matrix(16, 4), Vector(16, 0.0)};
  const auto [s, cache] = lstm_cell_forward(zero, Vector{0.3, -2.0, 5.0}, CellState::zeros(4));
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(cache.input_gate[k] == 0.5);
    CHECK(cache.forget_gate[k] == 0.5);
    CHECK(cache.output_gate[k] == 0.5);
    CHECK(cache.candidate[k] == 0.0);
    CHECK(s.c[k] == 0.0);
    CHECK(s.h[k] == 0.0);
  }

  CellState prior{Vector(4, 0.0), Vector{1.0, -2.0, 0.5, 4.0}};
  const auto [s2, c2] = lstm_cell_forward(zero, Vector{1, 1, 1}, prior);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(s2.c[k] == doctest::Approx(0.5 * prior.c[k]).epsilon(1e-15));
    CHECK(s2.h[k] == doctest::Approx(0.5 * std::tanh(0.5 * prior.c[k])).epsilon(1e-15));
  }

  CHECK_THROWS_AS(lstm_cell_forward(zero, Vector{1, 1}, CellState::zeros(4)), ShapeError);
}

TEST_CASE("gate codomains and bounded hidden state") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LstmClassifier m = random_classifier(seed, 13, 20, 3);
    Rng rng(seed);
    CellState state = CellState::zeros(20);
    for (int t = 0; t < 6; ++t) {
      auto [next, cache] = lstm_cell_forward(m.layers[0], random_vector(rng, 13, 5.0), state);
      for (std::size_t k = 0; k < 20; ++k) {
        CHECK((cache.input_gate[k] > 0.0 && cache.input_gate[k] < 1.0));
        CHECK((cache.forget_gate[k] > 0.0 && cache.forget_gate[k] < 1.0));
        CHECK((cache.output_gate[k] > 0.0 && cache.output_gate[k] < 1.0));
        CHECK(std::abs(cache.candidate[k]) < 1.0);
        CHECK(std::abs(next.h[k]) < 1.0);
      }
      state = next;
    }
  }
}

TEST_CASE("build_classifier") {
  const LstmClassifier m = build_classifier();
  CHECK(m.input_dim() == 13);
  CHECK(m.layers.front().units == 168);
  CHECK(m.num_classes() == 3);
  const ParamCount pc = count_params(m.descriptors());
  CHECK(pc.per_layer == std::vector<std::size_t>{122304, 507});
  CHECK(pc.total == 122811);
  CHECK(m.param_count() == 122811);
  CHECK(build_classifier() == m);
  CHECK_FALSE(build_classifier(13, 168, 3, 43) == m);

  const std::size_t u = 168;
  for (std::size_t k = 0; k < 4 * u; ++k) CHECK(m.layers[0].bias[k] == (k / u == kForgetGate ? 1.0 : 0.0));
  for (double b : m.head.bias) CHECK(b == 0.0);
  // Glorot per gate block: fan_in 13, fan_out 168.
  const double bound = std::sqrt(6.0 / (13.0 + 168.0));
  for (double w : m.layers[0].input_weights.values()) CHECK(std::abs(w) <= bound);

  const LstmClassifier tiny = build_classifier(1, 1, 2, 5);
  const ParamCount tc = count_params(tiny.descriptors());
  CHECK(tc.per_layer == std::vector<std::size_t>{12, 4});
  CHECK(tc.total == 16);

  CHECK(build_classifier(13, 168, 3, 1, 3).layers.size() == 3);
}

TEST_CASE("lstm_forward") {
  Rng rng(4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LstmClassifier m = random_classifier(seed, 13, 16, 3);
    const Matrix seq = random_matrix(rng, 1 + seed % 3, 13);
    const ForwardResult f = lstm_forward(m, seq);
    double sum = 0.0;
    for (double p : f.probs) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }

  const LstmClassifier m = random_classifier(9, 13, 16, 3);
  const Vector x = random_vector(rng, 13);
  const auto [state, cache] = lstm_cell_forward(m.layers[0], x, CellState::zeros(16));
  const Vector manual = dense_forward(m.head, state.h);
  CHECK(lstm_forward(m, Matrix(1, 13, x)).probs == manual);

  LstmClassifier zero = build_classifier(13, 168, 3, 1);
  for (auto& c : zero.layers) {
    for (double& w : c.input_weights.values()) w = 0.0;
    for (double& w : c.recurrent_weights.values()) w = 0.0;
    for (double& b : c.bias) b = 0.0;
  }
  for (double& w : zero.head.weights.values()) w = 0.0;
  for (double p : lstm_forward(zero, Matrix(1, 13, x)).probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(lstm_forward(m, Matrix(1, 12)), ShapeError);
}

TEST_CASE("BPTT gradients match central differences") {
  for (std::size_t depth : {1, 2}) {
    for (std::size_t steps : {1, 3}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CAPTURE(depth);
        CAPTURE(steps);
        CAPTURE(seed);
        LstmClassifier m = random_classifier(seed + 10 * steps, 4, 5, 3, depth);
        Rng rng(derive_seed(seed, steps));
        Matrix seq = random_matrix(rng, steps, 4);
        const std::size_t cls = rng.index(3);
        const ClassifierGrads g = lstm_backward(m, lstm_forward(m, seq), cls);
        CHECK(g.loss == doctest::Approx(loss_of(m, seq, cls)).epsilon(1e-15));
        auto f = [&] { return loss_of(m, seq, cls); };
        for (std::size_t l = 0; l < depth; ++l) {
          CHECK(max_fd_error(m.layers[l].input_weights.values(), g.layers[l].input_weights.values(), f) < 1e-5);
          CHECK(max_fd_error(m.layers[l].recurrent_weights.values(), g.layers[l].recurrent_weights.values(), f) < 1e-5);
          CHECK(max_fd_error(m.layers[l].bias, g.layers[l].bias, f) < 1e-5);
        }
        CHECK(max_fd_error(m.head.weights.values(), g.head_weights.values(), f) < 1e-5);
        CHECK(max_fd_error(m.head.bias, g.head_bias, f) < 1e-5);
        CHECK(max_fd_error(seq.values(), g.input_grad.values(), f) < 1e-5);
      }
    }
  }
}

TEST_CASE("BPTT at the default size, T = 3") {
  LstmClassifier m = random_classifier(5, 13, 168, 3);
  Rng rng(5);
  Matrix seq = random_matrix(rng, 3, 13);
  const ClassifierGrads g = lstm_backward(m, lstm_forward(m, seq), 2);
  auto f = [&] { return loss_of(m, seq, 2); };
  // A sampled subset of entries keeps this fast.
  auto& cell = m.layers[0];
  for (int i = 0; i < 60; ++i) {
    const std::size_t wi = rng.index(cell.input_weights.size());
    const std::size_t ui = rng.index(cell.recurrent_weights.size());
    const std::size_t bi = rng.index(cell.bias.size());
    CHECK(saelstm::testing::rel_error(g.layers[0].input_weights.values()[wi],
                                      saelstm::testing::central_difference(&cell.input_weights.values()[wi], f)) < 1e-5);
    CHECK(saelstm::testing::rel_error(g.layers[0].recurrent_weights.values()[ui],
                                      saelstm::testing::central_difference(&cell.recurrent_weights.values()[ui], f)) <
          1e-5);
    CHECK(saelstm::testing::rel_error(g.layers[0].bias[bi], saelstm::testing::central_difference(&cell.bias[bi], f)) <
          1e-5);
  }
}

TEST_CASE("one-hot output gives zero gradients") {
  LstmClassifier m = random_classifier(3, 4, 5, 3);
  for (double& w : m.head.weights.values()) w = 0.0;
  m.head.bias = {0.0, 1000.0, 0.0};
  Rng rng(1);
  const ClassifierGrads g = lstm_backward(m, lstm_forward(m, random_matrix(rng, 3, 4)), 1);
  CHECK(g.loss == 0.0);
  for (const auto& l : g.layers) {
    for (double v : l.input_weights.values()) CHECK(std::abs(v) <= 1e-9);
    for (double v : l.recurrent_weights.values()) CHECK(std::abs(v) <= 1e-9);
    for (double v : l.bias) CHECK(std::abs(v) <= 1e-9);
  }
  for (double v : g.head_weights.values()) CHECK(std::abs(v) <= 1e-9);
  for (double v : g.head_bias) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("cache mismatch is an internal error") {
  const LstmClassifier a = random_classifier(1, 4, 5, 3);
  const LstmClassifier b = random_classifier(1, 4, 6, 3);
  const LstmClassifier deep = random_classifier(1, 4, 5, 3, 2);
  Rng rng(2);
  const Matrix seq = random_matrix(rng, 2, 4);
  CHECK_THROWS_AS(lstm_backward(b, lstm_forward(a, seq), 0), InternalError);
  CHECK_THROWS_AS(lstm_backward(deep, lstm_forward(a, seq), 0), InternalError);
  CHECK_THROWS_AS(lstm_backward(a, ForwardResult{}, 0), InternalError);
}

TEST_CASE("loss on a fixed batch decreases over the first 5 Adam steps") {
  int decreasing = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    LstmClassifier m = build_classifier(13, 168, 3, seed);
    const LabeledTable data = separable_clusters(6, 3, 13, seed);
    auto batch_loss = [&] {
      double total = 0.0;
      for (std::size_t i = 0; i < data.labels.size(); ++i) {
        total += loss_of(m, Matrix(1, 13, Vector(data.features.row(i).begin(), data.features.row(i).end())),
                         static_cast<std::size_t>(data.labels[i]));
      }
      return total / static_cast<double>(data.labels.size());
    };
    auto& cell = m.layers[0];
    AdamOptimizer adam({cell.input_weights.size(), cell.recurrent_weights.size(), cell.bias.size(),
                        m.head.weights.size(), m.head.bias.size()},
                       AdamHyperParams{});
    bool ok = true;
    double prev = batch_loss();
    for (int step = 0; step < 5; ++step) {
      ClassifierGrads sum = zero_grads(m);
      for (std::size_t i = 0; i < data.labels.size(); ++i) {
        const Matrix seq(1, 13, Vector(data.features.row(i).begin(), data.features.row(i).end()));
        const ClassifierGrads g = lstm_backward(m, lstm_forward(m, seq), static_cast<std::size_t>(data.labels[i]));
        auto add = [](std::span<double> dst, std::span<const double> src) {
          for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
        };
        add(sum.layers[0].input_weights.values(), g.layers[0].input_weights.values());
        add(sum.layers[0].recurrent_weights.values(), g.layers[0].recurrent_weights.values());
        add(sum.layers[0].bias, g.layers[0].bias);
        add(sum.head_weights.values(), g.head_weights.values());
        add(sum.head_bias, g.head_bias);
      }
      const double n = static_cast<double>(data.labels.size());
      for (auto* v : {&sum.layers[0].bias, &sum.head_bias}) {
        for (double& x : *v) x /= n;
      }
      for (auto* mat : {&sum.layers[0].input_weights, &sum.layers[0].recurrent_weights, &sum.head_weights}) {
        for (double& x : mat->values()) x /= n;
      }
      adam.step({cell.input_weights.values(), cell.recurrent_weights.values(), cell.bias, m.head.weights.values(),
                 m.head.bias},
                {sum.layers[0].input_weights.values(), sum.layers[0].recurrent_weights.values(), sum.layers[0].bias,
                 sum.head_weights.values(), sum.head_bias});
      const double now = batch_loss();
      if (!(now < prev)) ok = false;
      prev = now;
    }
    decreasing += ok;
  }
  CHECK(decreasing >= 9);
}

TEST_CASE("train_classifier") {
  const LabeledTable data = separable_clusters(20, 3, 13, 11);

  SUBCASE("overfits 60 separable samples") {
    LstmClassifier m = build_classifier();
    const TrainHistory h = train_classifier(m, data.features, data.labels, ClassifierTrainConfig{.epochs = 200});
    CHECK(h.epochs_completed() == 200);
    CHECK(h.epoch_accuracy.back() == 1.0);
    CHECK(sequence_accuracy(m, data.features, data.labels) == 1.0);
  }
  SUBCASE("zero epochs is a no-op") {
    LstmClassifier m = build_classifier();
    const LstmClassifier before = m;
    CHECK(train_classifier(m, data.features, data.labels, ClassifierTrainConfig{.epochs = 0}).epochs_completed() == 0);
    CHECK(m == before);
  }
  SUBCASE("deterministic") {
    LstmClassifier a = build_classifier(13, 32, 3, 2);
    LstmClassifier b = build_classifier(13, 32, 3, 2);
    const ClassifierTrainConfig cfg{.epochs = 5, .seed = 9};
    const TrainHistory ha = train_classifier(a, data.features, data.labels, cfg);
    const TrainHistory hb = train_classifier(b, data.features, data.labels, cfg);
    CHECK(a == b);
    CHECK(ha.epoch_loss == hb.epoch_loss);
    CHECK(ha.epoch_accuracy == hb.epoch_accuracy);
  }
  SUBCASE("fine-tuning updates the encoder only when asked") {
    SaeModel frozen = build_sae(1);
    const SaeModel original = frozen;
    LstmClassifier a = build_classifier(13, 16, 3, 3);
    train_classifier(a, data.features, data.labels, ClassifierTrainConfig{.epochs = 2}, &frozen);
    CHECK(frozen == original);

    SaeModel tuned = build_sae(1);
    LstmClassifier b = build_classifier(13, 16, 3, 3);
    train_classifier(b, data.features, data.labels, ClassifierTrainConfig{.epochs = 2, .fine_tune_encoder = true},
                     &tuned);
    CHECK_FALSE(tuned == original);
    for (std::size_t i = kSaeEncoderLayers; i < 6; ++i) CHECK(tuned.layers[i] == original.layers[i]);
  }
  SUBCASE("sequence windows") {
    LstmClassifier m = build_classifier(13, 16, 3, 4);
    m.sequence_length = 3;
    const TrainHistory h = train_classifier(m, data.features, data.labels, ClassifierTrainConfig{.epochs = 2});
    CHECK(h.epochs_completed() == 2);
    const Matrix w = sequence_window(data.features, 1, 3);
    CHECK(w.rows() == 3);
    for (double v : w.row(0)) CHECK(v == 0.0);
    CHECK(Vector(w.row(2).begin(), w.row(2).end()) ==
          Vector(data.features.row(1).begin(), data.features.row(1).end()));
  }
  SUBCASE("non-finite input is a numeric failure") {
    Matrix bad = data.features;
    bad(3, 3) = NAN;
    LstmClassifier m = build_classifier(13, 16, 3, 4);
    CHECK_THROWS_AS(train_classifier(m, bad, data.labels, ClassifierTrainConfig{.epochs = 1}), NumericFailure);
  }
  SUBCASE("bad labels") {
    LstmClassifier m = build_classifier(13, 16, 3, 4);
    std::vector<int> labels = data.labels;
    labels[0] = 5;
    CHECK_THROWS(train_classifier(m, data.features, labels, ClassifierTrainConfig{.epochs = 1}));
  }
}

TEST_CASE("predict") {
  CHECK(argmax(Vector{0.2, 0.5, 0.3}) == 1);
  CHECK(argmax(Vector{0.5, 0.5, 0.0}) == 0);

  Rng rng(8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    LstmClassifier m = random_classifier(seed, 13, 12, 3);
    const Vector x = random_vector(rng, 13);
    const Prediction p = predict(m, x);
    const ForwardResult f = lstm_forward(m, Matrix(1, 13, x));
    CHECK(p.label == argmax(f.probs));
    CHECK(p.probs == f.probs);

    // Positive scaling of the logits never changes the class.
    for (double scale : {0.01, 0.5, 3.0, 100.0}) {
      LstmClassifier s = m;
      for (double& w : s.head.weights.values()) w *= scale;
      for (double& b : s.head.bias) b *= scale;
      CHECK(predict(s, x).label == p.label);
    }
  }
  CHECK_THROWS_AS(predict(build_classifier(), Vector(5, 0.0)), ShapeError);
}
