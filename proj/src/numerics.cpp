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

#include "saelstm/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "saelstm/errors.hpp"
#include "saelstm/random.hpp"

namespace saelstm {

namespace {

std::string dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const { return saelstm::all_finite(data_); }

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Vector matvec(const Matrix& w, std::span<const double> x) {
  if (x.size() != w.cols()) throw ShapeError("matvec: input length " + dims(x.size(), w.cols()));
  Vector y(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double* row = w.row(r).data();
    double acc = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

Vector matvec_transposed(const Matrix& w, std::span<const double> x) {
  if (x.size() != w.rows()) {
    throw ShapeError("matvec_transposed: input length " + dims(x.size(), w.rows()));
  }
  Vector y(w.cols(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* row = w.row(r).data();
    for (std::size_t c = 0; c < y.size(); ++c) y[c] += row[c] * xr;
  }
  return y;
}

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
    case Activation::kSoftmax: return "softmax";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  if (name == "softmax") return Activation::kSoftmax;
  throw DomainError("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector apply_activation(Activation kind, std::span<const double> x) {
  if (kind == Activation::kSoftmax) return softmax(x);
  Vector y(x.begin(), x.end());
  switch (kind) {
    case Activation::kRelu:
      for (double& v : y) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::kSigmoid:
      for (double& v : y) v = sigmoid(v);
      break;
    case Activation::kTanh:
      for (double& v : y) v = std::tanh(v);
      break;
    default:
      break;
  }
  return y;
}

Vector activation_derivative(Activation kind, std::span<const double> x) {
  Vector d(x.size(), 1.0);
  switch (kind) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] > 0.0 ? 1.0 : 0.0;
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = sigmoid(x[i]);
        d[i] = s * (1.0 - s);
      }
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = std::tanh(x[i]);
        d[i] = 1.0 - t * t;
      }
      break;
    case Activation::kIdentity:
      break;
    case Activation::kSoftmax:
      throw DomainError("softmax has no elementwise derivative");
  }
  return d;
}

Vector softmax(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  Vector p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - peak);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw DomainError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Vector dense_forward(const DenseLayer& layer, std::span<const double> x) {
  if (layer.bias.size() != layer.fan_out()) {
    throw ShapeError("dense layer bias length " + dims(layer.bias.size(), layer.fan_out()));
  }
  Vector z = matvec(layer.weights, x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];
  return apply_activation(layer.activation, z);
}

DenseGrads dense_backward(const DenseLayer& layer, std::span<const double> x,
                          std::span<const double> upstream) {
  if (upstream.size() != layer.fan_out()) {
    throw ShapeError("dense_backward: upstream length " + dims(upstream.size(), layer.fan_out()));
  }
  Vector z = matvec(layer.weights, x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];

  // Gradient with respect to the pre-activation.
  Vector dz(upstream.size());
  if (layer.activation == Activation::kSoftmax) {
    const Vector s = softmax(z);
    double dot = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) dot += s[i] * upstream[i];
    for (std::size_t i = 0; i < s.size(); ++i) dz[i] = s[i] * (upstream[i] - dot);
  } else {
    const Vector d = activation_derivative(layer.activation, z);
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = d[i] * upstream[i];
  }

  DenseGrads g;
  g.grad_x = matvec_transposed(layer.weights, dz);
  g.grad_weights = Matrix(layer.fan_out(), layer.fan_in());
  for (std::size_t r = 0; r < dz.size(); ++r) {
    if (dz[r] == 0.0) continue;
    auto row = g.grad_weights.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) row[c] = dz[r] * x[c];
  }
  g.grad_bias = std::move(dz);
  return g;
}

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ShapeError("mse_loss: length " + dims(pred.size(), target.size()));
  if (pred.empty()) throw ShapeError("mse_loss: empty vectors");
  const double n = static_cast<double>(pred.size());
  LossResult r;
  r.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    r.loss += diff * diff;
    r.grad[i] = 2.0 * diff / n;
  }
  r.loss /= n;
  return r;
}

LossResult sparse_cce_loss(std::span<const double> probs, std::size_t true_class) {
  if (true_class >= probs.size()) {
    throw DomainError("class index " + std::to_string(true_class) + " out of range for " +
                      std::to_string(probs.size()) + " classes");
  }
  LossResult r;
  r.loss = -std::log(std::max(probs[true_class], kProbabilityFloor));
  r.grad.assign(probs.begin(), probs.end());
  r.grad[true_class] -= 1.0;
  return r;
}

Matrix glorot_uniform_init(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  if (fan_in == 0 || fan_out == 0) throw DomainError("glorot_uniform_init: zero fan");
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(seed);
  Matrix w(fan_out, fan_in);
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || state.m.size() != params.size()) {
    throw ShapeError("adam_step: params " + std::to_string(params.size()) + ", grads " +
                     std::to_string(grads.size()) + ", state " + std::to_string(state.m.size()));
  }
  const AdamHyperParams& h = state.hyper;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * g;
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

AdamOptimizer::AdamOptimizer(const std::vector<std::size_t>& sizes, AdamHyperParams hyper) {
  states_.reserve(sizes.size());
  for (std::size_t n : sizes) states_.emplace_back(n, hyper);
}

void AdamOptimizer::step(const std::vector<std::span<double>>& params,
                         const std::vector<std::span<const double>>& grads) {
  if (params.size() != states_.size() || grads.size() != states_.size()) {
    throw ShapeError("AdamOptimizer: expected " + std::to_string(states_.size()) + " tensors");
  }
  for (std::size_t i = 0; i < states_.size(); ++i) adam_step(states_[i], params[i], grads[i]);
}

double global_norm(const std::vector<std::span<const double>>& tensors) {
  double sq = 0.0;
  for (const auto& t : tensors) {
    for (double v : t) sq += v * v;
  }
  return std::sqrt(sq);
}

double clip_global_norm(const std::vector<std::span<double>>& tensors, double max_norm) {
  std::vector<std::span<const double>> views(tensors.begin(), tensors.end());
  const double norm = global_norm(views);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& t : tensors) {
      for (double& v : t) v *= scale;
    }
  }
  return norm;
}

std::size_t count_params(const LayerDescriptor& layer) {
  switch (layer.kind) {
    case LayerKind::kDense:
      return layer.output * layer.input + layer.output;
    case LayerKind::kLstm:
      return 4 * (layer.output * (layer.input + layer.output) + layer.output);
  }
  return 0;
}

ParamCount count_params(std::span<const LayerDescriptor> layers) {
  ParamCount pc;
  for (const auto& l : layers) {
    pc.per_layer.push_back(count_params(l));
    pc.total += pc.per_layer.back();
  }
  return pc;
}

}  // namespace saelstm
