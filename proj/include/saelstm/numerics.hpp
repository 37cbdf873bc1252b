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
#include <string_view>
#include <vector>

namespace saelstm {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = W x
Vector matvec(const Matrix& w, std::span<const double> x);
// y = W^T x
Vector matvec_transposed(const Matrix& w, std::span<const double> x);

bool all_finite(std::span<const double> values);

enum class Activation { kRelu, kSigmoid, kTanh, kIdentity, kSoftmax };

std::string_view to_string(Activation kind);
Activation parse_activation(std::string_view name);

double sigmoid(double x);

// Elementwise activation. kSoftmax is handled as the vector softmax.
Vector apply_activation(Activation kind, std::span<const double> x);

// Elementwise derivative evaluated at pre-activation x. relu'(0) = 0.
// Throws DomainError for kSoftmax, whose derivative is not diagonal.
Vector activation_derivative(Activation kind, std::span<const double> x);

// Max-subtracted softmax.
Vector softmax(std::span<const double> logits);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

struct DenseLayer {
  Matrix weights;  // fan_out x fan_in
  Vector bias;     // fan_out
  Activation activation = Activation::kIdentity;

  std::size_t fan_in() const { return weights.cols(); }
  std::size_t fan_out() const { return weights.rows(); }
  std::size_t param_count() const { return weights.size() + bias.size(); }
  bool operator==(const DenseLayer&) const = default;
};

struct DenseGrads {
  Vector grad_x;
  Matrix grad_weights;
  Vector grad_bias;
};

// act(W x + b)
Vector dense_forward(const DenseLayer& layer, std::span<const double> x);

// Gradients of <upstream, dense_forward(layer, x)> with respect to x, W and b.
DenseGrads dense_backward(const DenseLayer& layer, std::span<const double> x,
                          std::span<const double> upstream);

struct LossResult {
  double loss = 0.0;
  Vector grad;
};

// Mean squared error; grad is with respect to pred.
LossResult mse_loss(std::span<const double> pred, std::span<const double> target);

inline constexpr double kProbabilityFloor = 1e-12;

// -ln(max(probs[true_class], 1e-12)); grad is with respect to the logits
// that produced probs through softmax (probs - onehot).
LossResult sparse_cce_loss(std::span<const double> probs, std::size_t true_class);

// fan_out x fan_in matrix with entries uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed);

struct AdamHyperParams {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators for one parameter tensor.
struct AdamState {
  Vector m;
  Vector v;
  std::uint64_t t = 0;
  AdamHyperParams hyper;

  AdamState() = default;
  AdamState(std::size_t size, AdamHyperParams h) : m(size, 0.0), v(size, 0.0), hyper(h) {}
};

// One bias-corrected Adam update of params in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

// Adam over an ordered list of parameter tensors.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const std::vector<std::size_t>& sizes, AdamHyperParams hyper);

  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads);

  const std::vector<AdamState>& states() const { return states_; }

 private:
  std::vector<AdamState> states_;
};

double global_norm(const std::vector<std::span<const double>>& tensors);

// Rescales every tensor when the joint L2 norm exceeds max_norm. Returns the
// norm before clipping. max_norm <= 0 disables clipping.
double clip_global_norm(const std::vector<std::span<double>>& tensors, double max_norm);

enum class LayerKind { kDense, kLstm };

// Dense: input = fan_in, output = fan_out. LSTM: input = input_dim, output = units.
struct LayerDescriptor {
  LayerKind kind = LayerKind::kDense;
  std::size_t input = 0;
  std::size_t output = 0;
};

struct ParamCount {
  std::vector<std::size_t> per_layer;
  std::size_t total = 0;
};

std::size_t count_params(const LayerDescriptor& layer);
ParamCount count_params(std::span<const LayerDescriptor> layers);

}  // namespace saelstm
