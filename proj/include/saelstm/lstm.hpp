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
#include <utility>
#include <vector>

#include "saelstm/numerics.hpp"
#include "saelstm/sae.hpp"

namespace saelstm {

inline constexpr std::size_t kLstmUnits = 168;
inline constexpr std::size_t kNumClasses = 3;

// Row blocks of the stacked gate matrices, each `units` rows tall.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCandidateGate = 2, kOutputGate = 3 };

struct LstmCell {
  std::size_t input_dim = 0;
  std::size_t units = 0;
  Matrix input_weights;      // 4*units x input_dim
  Matrix recurrent_weights;  // 4*units x units
  Vector bias;               // 4*units

  std::size_t param_count() const { return input_weights.size() + recurrent_weights.size() + bias.size(); }

  bool operator==(const LstmCell&) const = default;
};

struct CellState {
  Vector h;
  Vector c;

  static CellState zeros(std::size_t units) { return {Vector(units, 0.0), Vector(units, 0.0)}; }
};

// Everything one step's backward pass needs.
struct CellCache {
  Vector x;
  Vector h_prev;
  Vector c_prev;
  Vector input_gate;
  Vector forget_gate;
  Vector candidate;
  Vector output_gate;
  Vector c;
  Vector tanh_c;
};

//   i = sig(Wi x + Ui h + bi)    f = sig(Wf x + Uf h + bf)
//   o = sig(Wo x + Uo h + bo)    g = tanh(Wc x + Uc h + bc)
//   c' = f*c + i*g               h' = o*tanh(c')
std::pair<CellState, CellCache> lstm_cell_forward(const LstmCell& cell, std::span<const double> x,
                                                  const CellState& state);

struct LstmClassifier {
  std::vector<LstmCell> layers;  // stacked; layer l > 0 reads layer l-1's hidden sequence
  DenseLayer head;               // units -> classes, softmax
  std::size_t sequence_length = 1;

  std::size_t input_dim() const { return layers.front().input_dim; }
  std::size_t num_classes() const { return head.fan_out(); }
  std::vector<LayerDescriptor> descriptors() const;
  std::size_t param_count() const;

  bool operator==(const LstmClassifier&) const = default;
};

// Glorot uniform per gate block for input and recurrent weights, forget-gate
// bias 1, other biases 0. depth > 1 stacks further LSTM layers of `units`.
LstmClassifier build_classifier(std::size_t input_dim = kSaeWidths[kSaeEncoderLayers], std::size_t units = kLstmUnits,
                                std::size_t classes = kNumClasses, std::uint64_t seed = 42, std::size_t depth = 1);

struct ForwardResult {
  Vector probs;
  Vector logits;
  std::vector<std::vector<CellCache>> steps;  // [layer][t]
};

// Runs every layer over the T x input_dim sequence from zero state and
// applies the head to the last hidden state of the top layer.
ForwardResult lstm_forward(const LstmClassifier& model, const Matrix& sequence);

struct CellGrads {
  Matrix input_weights;
  Matrix recurrent_weights;
  Vector bias;
};

struct ClassifierGrads {
  double loss = 0.0;
  std::vector<CellGrads> layers;
  Matrix head_weights;
  Vector head_bias;
  Matrix input_grad;  // T x input_dim, d(loss)/d(sequence)
};

ClassifierGrads zero_grads(const LstmClassifier& model);

// Exact BPTT gradients of the sparse categorical cross-entropy at true_class.
// Throws InternalError when the caches were not produced by this model.
ClassifierGrads lstm_backward(const LstmClassifier& model, const ForwardResult& forward, std::size_t true_class);

// Row `row` and the length-1 rows before it, oldest first; rows before the
// start of the table are zero.
Matrix sequence_window(const Matrix& rows, std::size_t row, std::size_t length);

struct ClassifierTrainConfig {
  std::size_t epochs = 400;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  std::uint64_t seed = 42;
  double clip_norm = 5.0;  // <= 0 disables clipping
  bool fine_tune_encoder = false;
};

// Adam on mean batch cross-entropy with global-norm clipping.
//
// Without an encoder, `inputs` are latent encodings. With one, `inputs` are
// normalized features run through the encoder on the fly; the encoder is
// updated only when config.fine_tune_encoder is set. Throws NumericFailure on
// a non-finite loss.
TrainHistory train_classifier(LstmClassifier& model, const Matrix& inputs, std::span<const int> labels,
                              const ClassifierTrainConfig& config, SaeModel* encoder = nullptr);

struct Prediction {
  std::size_t label = 0;
  Vector probs;
};

// Single record as a one-step sequence.
Prediction predict(const LstmClassifier& model, std::span<const double> x);

// Every row of an encoded table, windowed by the model's sequence length.
std::vector<Prediction> predict_table(const LstmClassifier& model, const Matrix& encoded);

}  // namespace saelstm
