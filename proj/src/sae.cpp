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

#include "saelstm/sae.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "saelstm/errors.hpp"
#include "saelstm/random.hpp"

namespace saelstm {

namespace {

void check_width(const SaeModel& model, std::size_t width) {
  if (width != model.input_width()) {
    throw ShapeError("autoencoder expects width " + std::to_string(model.input_width()) + ", got " +
                     std::to_string(width));
  }
}

// Trains `stack` (applied in order) to reproduce its own input.
void train_reconstruction(std::vector<DenseLayer*> stack, const Matrix& inputs, const SaeTrainConfig& config,
                          std::uint64_t shuffle_seed, TrainHistory& history) {
  std::vector<std::size_t> sizes;
  for (const DenseLayer* l : stack) {
    sizes.push_back(l->weights.size());
    sizes.push_back(l->bias.size());
  }
  AdamOptimizer adam(sizes, {.learning_rate = config.learning_rate});
  Rng rng(shuffle_seed);

  const std::size_t n = inputs.rows();
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<DenseGrads> acc(stack.size());
  std::vector<Vector> layer_inputs(stack.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += batch, ++batch_index) {
      const std::size_t end = std::min(n, begin + batch);
      for (std::size_t l = 0; l < stack.size(); ++l) {
        acc[l].grad_weights = Matrix(stack[l]->fan_out(), stack[l]->fan_in());
        acc[l].grad_bias.assign(stack[l]->fan_out(), 0.0);
      }
      double batch_loss = 0.0;
      for (std::size_t b = begin; b < end; ++b) {
        const auto x = inputs.row(order[b]);
        Vector h(x.begin(), x.end());
        for (std::size_t l = 0; l < stack.size(); ++l) {
          layer_inputs[l] = h;
          h = dense_forward(*stack[l], h);
        }
        LossResult loss = mse_loss(h, x);
        batch_loss += loss.loss;
        Vector upstream = std::move(loss.grad);
        for (std::size_t l = stack.size(); l-- > 0;) {
          DenseGrads g = dense_backward(*stack[l], layer_inputs[l], upstream);
          auto dst = acc[l].grad_weights.values();
          const auto src = g.grad_weights.values();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
          for (std::size_t i = 0; i < g.grad_bias.size(); ++i) acc[l].grad_bias[i] += g.grad_bias[i];
          upstream = std::move(g.grad_x);
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericFailure("autoencoder loss became non-finite at epoch " + std::to_string(epoch + 1) +
                             ", batch " + std::to_string(batch_index + 1));
      }
      epoch_loss += batch_loss;

      const double scale = 1.0 / static_cast<double>(end - begin);
      std::vector<std::span<double>> params;
      std::vector<std::span<const double>> grads;
      for (std::size_t l = 0; l < stack.size(); ++l) {
        for (double& v : acc[l].grad_weights.values()) v *= scale;
        for (double& v : acc[l].grad_bias) v *= scale;
        params.emplace_back(stack[l]->weights.values());
        params.emplace_back(stack[l]->bias);
        grads.emplace_back(acc[l].grad_weights.values());
        grads.emplace_back(acc[l].grad_bias);
      }
      adam.step(params, grads);
    }
    const auto stop = std::chrono::steady_clock::now();
    history.epoch_loss.push_back(n > 0 ? epoch_loss / static_cast<double>(n) : 0.0);
    history.epoch_seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
}

}  // namespace

std::vector<LayerDescriptor> SaeModel::descriptors() const {
  std::vector<LayerDescriptor> out;
  for (const auto& l : layers) out.push_back({LayerKind::kDense, l.fan_in(), l.fan_out()});
  return out;
}

std::size_t SaeModel::param_count() const { return count_params(descriptors()).total; }

SaeModel build_sae(std::uint64_t seed) {
  SaeModel model;
  model.seed = seed;
  for (std::size_t i = 0; i + 1 < kSaeWidths.size(); ++i) {
    DenseLayer layer;
    layer.weights = glorot_uniform_init(kSaeWidths[i], kSaeWidths[i + 1], derive_seed(seed, i));
    layer.bias.assign(kSaeWidths[i + 1], 0.0);
    layer.activation = i + 2 == kSaeWidths.size() ? Activation::kIdentity : Activation::kRelu;
    model.layers.push_back(std::move(layer));
  }
  return model;
}

TrainHistory train_sae(SaeModel& model, const Matrix& features, const SaeTrainConfig& config) {
  if (features.rows() > 0) check_width(model, features.cols());
  TrainHistory history;
  if (config.epochs == 0 || features.rows() == 0) return history;

  const std::size_t depth = model.layers.size();
  if (!config.layerwise) {
    std::vector<DenseLayer*> stack;
    for (auto& l : model.layers) stack.push_back(&l);
    train_reconstruction(stack, features, config, derive_seed(config.seed, 0), history);
    return history;
  }

  Matrix inputs = features;
  for (std::size_t k = 0; k < kSaeEncoderLayers; ++k) {
    train_reconstruction({&model.layers[k], &model.layers[depth - 1 - k]}, inputs, config,
                         derive_seed(config.seed, k), history);
    Matrix next(inputs.rows(), model.layers[k].fan_out());
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
      const Vector h = dense_forward(model.layers[k], inputs.row(r));
      std::copy(h.begin(), h.end(), next.row(r).begin());
    }
    inputs = std::move(next);
  }
  return history;
}

EncoderTrace encoder_forward(const SaeModel& model, std::span<const double> x) {
  check_width(model, x.size());
  EncoderTrace trace;
  trace.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < kSaeEncoderLayers; ++l) {
    trace.activations[l + 1] = dense_forward(model.layers[l], trace.activations[l]);
  }
  return trace;
}

void encoder_backward(const SaeModel& model, const EncoderTrace& trace, std::span<const double> grad_latent,
                      std::vector<DenseGrads>& grads) {
  if (grads.size() != kSaeEncoderLayers) grads.resize(kSaeEncoderLayers);
  Vector upstream(grad_latent.begin(), grad_latent.end());
  for (std::size_t l = kSaeEncoderLayers; l-- > 0;) {
    const DenseLayer& layer = model.layers[l];
    DenseGrads g = dense_backward(layer, trace.activations[l], upstream);
    DenseGrads& acc = grads[l];
    if (acc.grad_weights.rows() != layer.fan_out() || acc.grad_weights.cols() != layer.fan_in()) {
      acc.grad_weights = Matrix(layer.fan_out(), layer.fan_in());
      acc.grad_bias.assign(layer.fan_out(), 0.0);
    }
    auto dst = acc.grad_weights.values();
    const auto src = g.grad_weights.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    for (std::size_t i = 0; i < g.grad_bias.size(); ++i) acc.grad_bias[i] += g.grad_bias[i];
    upstream = std::move(g.grad_x);
  }
}

Vector encode(const SaeModel& model, std::span<const double> x) { return encoder_forward(model, x).latent(); }

Matrix encode(const SaeModel& model, const Matrix& rows) {
  Matrix out(rows.rows(), model.latent_width());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const Vector z = encode(model, rows.row(r));
    std::copy(z.begin(), z.end(), out.row(r).begin());
  }
  return out;
}

Vector decode(const SaeModel& model, std::span<const double> latent) {
  if (latent.size() != model.latent_width()) {
    throw ShapeError("decoder expects width " + std::to_string(model.latent_width()) + ", got " +
                     std::to_string(latent.size()));
  }
  Vector h(latent.begin(), latent.end());
  for (std::size_t l = kSaeEncoderLayers; l < model.layers.size(); ++l) h = dense_forward(model.layers[l], h);
  return h;
}

Vector reconstruct(const SaeModel& model, std::span<const double> x) { return decode(model, encode(model, x)); }

Matrix reconstruct(const SaeModel& model, const Matrix& rows) {
  Matrix out(rows.rows(), model.layers.back().fan_out());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const Vector y = reconstruct(model, rows.row(r));
    std::copy(y.begin(), y.end(), out.row(r).begin());
  }
  return out;
}

std::string_view to_string(ImportanceMethod method) {
  return method == ImportanceMethod::kWeights ? "weights" : "activations";
}

ImportanceMethod parse_importance_method(std::string_view name) {
  if (name == "weights") return ImportanceMethod::kWeights;
  if (name == "activations") return ImportanceMethod::kActivations;
  throw ConfigError("unknown importance method '" + std::string(name) + "'");
}

std::vector<FeatureScore> feature_importance(const SaeModel& model, const std::vector<std::string>& names,
                                             ImportanceMethod method, const Matrix* data) {
  const DenseLayer& first = model.layers.front();
  const std::size_t width = first.fan_in();
  if (names.size() != width) {
    throw SchemaError("feature_importance: " + std::to_string(names.size()) + " names for " +
                      std::to_string(width) + " inputs");
  }

  // Per hidden unit weight applied to |W1[k][j]|.
  Vector unit_weight(first.fan_out(), 1.0);
  if (method == ImportanceMethod::kActivations) {
    if (data == nullptr || data->rows() == 0) throw DomainError("activation importance needs a non-empty table");
    check_width(model, data->cols());
    std::fill(unit_weight.begin(), unit_weight.end(), 0.0);
    for (std::size_t r = 0; r < data->rows(); ++r) {
      const Vector h = dense_forward(first, data->row(r));
      for (std::size_t k = 0; k < h.size(); ++k) unit_weight[k] += std::abs(h[k]);
    }
    for (double& v : unit_weight) v /= static_cast<double>(data->rows());
  }

  Vector raw(width, 0.0);
  for (std::size_t k = 0; k < first.fan_out(); ++k) {
    for (std::size_t j = 0; j < width; ++j) raw[j] += unit_weight[k] * std::abs(first.weights(k, j));
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);

  std::vector<FeatureScore> scores;
  for (std::size_t j = 0; j < width; ++j) {
    scores.push_back({names[j], j, total > 0.0 ? raw[j] / total : 1.0 / static_cast<double>(width)});
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const FeatureScore& a, const FeatureScore& b) { return a.score > b.score; });
  return scores;
}

}  // namespace saelstm
