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

#include "saelstm/lstm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "saelstm/errors.hpp"
#include "saelstm/random.hpp"

namespace saelstm {

namespace {

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// dst[r][:] += a[r] * b[:]
void add_outer(Matrix& dst, std::span<const double> a, std::span<const double> b) {
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    double* row = dst.row(r).data();
    for (std::size_t c = 0; c < b.size(); ++c) row[c] += ar * b[c];
  }
}

void add_into(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void check_cell_cache(const LstmCell& cell, const CellCache& cache) {
  const std::size_t u = cell.units;
  if (cache.x.size() != cell.input_dim || cache.h_prev.size() != u || cache.c_prev.size() != u ||
      cache.input_gate.size() != u || cache.forget_gate.size() != u || cache.candidate.size() != u ||
      cache.output_gate.size() != u || cache.c.size() != u || cache.tanh_c.size() != u) {
    throw InternalError("lstm_backward: cache does not match cell dimensions");
  }
}

}  // namespace

std::pair<CellState, CellCache> lstm_cell_forward(const LstmCell& cell, std::span<const double> x,
                                                  const CellState& state) {
  const std::size_t u = cell.units;
  if (x.size() != cell.input_dim) {
    throw ShapeError("lstm cell expects input width " + std::to_string(cell.input_dim) + ", got " +
                     std::to_string(x.size()));
  }
  if (state.h.size() != u || state.c.size() != u) throw ShapeError("lstm cell state width mismatch");

  Vector z = cell.bias;
  for (std::size_t r = 0; r < 4 * u; ++r) {
    const double* w = cell.input_weights.row(r).data();
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) acc += w[k] * x[k];
    z[r] += acc;
  }
  if (!is_zero(state.h)) {
    for (std::size_t r = 0; r < 4 * u; ++r) {
      const double* w = cell.recurrent_weights.row(r).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < u; ++k) acc += w[k] * state.h[k];
      z[r] += acc;
    }
  }

  CellCache cache;
  cache.x.assign(x.begin(), x.end());
  cache.h_prev = state.h;
  cache.c_prev = state.c;
  cache.input_gate.resize(u);
  cache.forget_gate.resize(u);
  cache.candidate.resize(u);
  cache.output_gate.resize(u);
  cache.c.resize(u);
  cache.tanh_c.resize(u);

  CellState next{Vector(u), Vector(u)};
  for (std::size_t k = 0; k < u; ++k) {
    const double i = sigmoid(z[kInputGate * u + k]);
    const double f = sigmoid(z[kForgetGate * u + k]);
    const double g = std::tanh(z[kCandidateGate * u + k]);
    const double o = sigmoid(z[kOutputGate * u + k]);
    const double c = f * state.c[k] + i * g;
    const double tc = std::tanh(c);
    cache.input_gate[k] = i;
    cache.forget_gate[k] = f;
    cache.candidate[k] = g;
    cache.output_gate[k] = o;
    cache.c[k] = c;
    cache.tanh_c[k] = tc;
    next.c[k] = c;
    next.h[k] = o * tc;
  }
  return {std::move(next), std::move(cache)};
}

std::vector<LayerDescriptor> LstmClassifier::descriptors() const {
  std::vector<LayerDescriptor> out;
  for (const auto& cell : layers) out.push_back({LayerKind::kLstm, cell.input_dim, cell.units});
  out.push_back({LayerKind::kDense, head.fan_in(), head.fan_out()});
  return out;
}

std::size_t LstmClassifier::param_count() const { return count_params(descriptors()).total; }

LstmClassifier build_classifier(std::size_t input_dim, std::size_t units, std::size_t classes, std::uint64_t seed,
                                std::size_t depth) {
  if (input_dim == 0 || units == 0 || classes == 0 || depth == 0) {
    throw DomainError("build_classifier: dimensions must be positive");
  }
  LstmClassifier model;
  for (std::size_t l = 0; l < depth; ++l) {
    LstmCell cell;
    cell.input_dim = l == 0 ? input_dim : units;
    cell.units = units;
    cell.input_weights = Matrix(4 * units, cell.input_dim);
    cell.recurrent_weights = Matrix(4 * units, units);
    cell.bias.assign(4 * units, 0.0);
    for (std::size_t g = 0; g < 4; ++g) {
      const Matrix w = glorot_uniform_init(cell.input_dim, units, derive_seed(seed, 16 * l + g));
      const Matrix r = glorot_uniform_init(units, units, derive_seed(seed, 16 * l + 4 + g));
      std::copy(w.values().begin(), w.values().end(), cell.input_weights.row(g * units).begin());
      std::copy(r.values().begin(), r.values().end(), cell.recurrent_weights.row(g * units).begin());
    }
    std::fill_n(cell.bias.begin() + static_cast<std::ptrdiff_t>(kForgetGate * units), units, 1.0);
    model.layers.push_back(std::move(cell));
  }
  model.head.weights = glorot_uniform_init(units, classes, derive_seed(seed, 1u << 20));
  model.head.bias.assign(classes, 0.0);
  model.head.activation = Activation::kSoftmax;
  return model;
}

ForwardResult lstm_forward(const LstmClassifier& model, const Matrix& sequence) {
  if (sequence.rows() == 0) throw ShapeError("lstm_forward: empty sequence");
  if (sequence.cols() != model.input_dim()) {
    throw ShapeError("lstm_forward: sequence width " + std::to_string(sequence.cols()) + ", expected " +
                     std::to_string(model.input_dim()));
  }
  const std::size_t steps = sequence.rows();
  ForwardResult out;
  out.steps.resize(model.layers.size());

  std::vector<Vector> inputs(steps);
  for (std::size_t t = 0; t < steps; ++t) inputs[t].assign(sequence.row(t).begin(), sequence.row(t).end());

  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LstmCell& cell = model.layers[l];
    CellState state = CellState::zeros(cell.units);
    out.steps[l].reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      auto [next, cache] = lstm_cell_forward(cell, inputs[t], state);
      inputs[t] = next.h;
      state = std::move(next);
      out.steps[l].push_back(std::move(cache));
    }
  }

  const Vector& h_last = inputs.back();
  out.logits = matvec(model.head.weights, h_last);
  for (std::size_t i = 0; i < out.logits.size(); ++i) out.logits[i] += model.head.bias[i];
  out.probs = softmax(out.logits);
  return out;
}

ClassifierGrads zero_grads(const LstmClassifier& model) {
  ClassifierGrads g;
  for (const auto& cell : model.layers) {
    g.layers.push_back({Matrix(4 * cell.units, cell.input_dim), Matrix(4 * cell.units, cell.units),
                        Vector(4 * cell.units, 0.0)});
  }
  g.head_weights = Matrix(model.head.fan_out(), model.head.fan_in());
  g.head_bias.assign(model.head.fan_out(), 0.0);
  return g;
}

ClassifierGrads lstm_backward(const LstmClassifier& model, const ForwardResult& forward, std::size_t true_class) {
  if (forward.steps.size() != model.layers.size() || forward.steps.empty() || forward.steps.front().empty()) {
    throw InternalError("lstm_backward: cache layer count does not match the model");
  }
  const std::size_t steps = forward.steps.front().size();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (forward.steps[l].size() != steps) throw InternalError("lstm_backward: ragged cache");
    for (const auto& cache : forward.steps[l]) check_cell_cache(model.layers[l], cache);
  }
  if (forward.probs.size() != model.num_classes()) {
    throw InternalError("lstm_backward: probability vector does not match the head");
  }

  ClassifierGrads grads = zero_grads(model);
  const LossResult loss = sparse_cce_loss(forward.probs, true_class);
  grads.loss = loss.loss;

  const CellCache& top = forward.steps.back().back();
  Vector h_top(top.c.size());
  for (std::size_t k = 0; k < h_top.size(); ++k) h_top[k] = top.output_gate[k] * top.tanh_c[k];

  add_outer(grads.head_weights, loss.grad, h_top);
  grads.head_bias = loss.grad;

  // External hidden-state gradient per step for the layer being processed.
  std::vector<Vector> dh_ext(steps);
  for (auto& v : dh_ext) v.assign(model.layers.back().units, 0.0);
  dh_ext.back() = matvec_transposed(model.head.weights, loss.grad);

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const LstmCell& cell = model.layers[l];
    CellGrads& g = grads.layers[l];
    const std::size_t u = cell.units;
    Vector dh_next(u, 0.0);
    Vector dc_next(u, 0.0);
    Vector dz(4 * u);
    std::vector<Vector> dx(steps);

    for (std::size_t t = steps; t-- > 0;) {
      const CellCache& cc = forward.steps[l][t];
      for (std::size_t k = 0; k < u; ++k) {
        const double dh = dh_ext[t][k] + dh_next[k];
        const double i = cc.input_gate[k];
        const double f = cc.forget_gate[k];
        const double gc = cc.candidate[k];
        const double o = cc.output_gate[k];
        const double tc = cc.tanh_c[k];
        const double d_o = dh * tc;
        const double dc = dc_next[k] + dh * o * (1.0 - tc * tc);
        dz[kInputGate * u + k] = dc * gc * i * (1.0 - i);
        dz[kForgetGate * u + k] = dc * cc.c_prev[k] * f * (1.0 - f);
        dz[kCandidateGate * u + k] = dc * i * (1.0 - gc * gc);
        dz[kOutputGate * u + k] = d_o * o * (1.0 - o);
        dc_next[k] = dc * f;
      }
      add_outer(g.input_weights, dz, cc.x);
      if (!is_zero(cc.h_prev)) add_outer(g.recurrent_weights, dz, cc.h_prev);
      add_into(g.bias, dz);
      dx[t] = matvec_transposed(cell.input_weights, dz);
      if (t > 0) {
        dh_next = matvec_transposed(cell.recurrent_weights, dz);
      }
    }
    dh_ext = std::move(dx);
  }

  grads.input_grad = Matrix(steps, model.input_dim());
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy(dh_ext[t].begin(), dh_ext[t].end(), grads.input_grad.row(t).begin());
  }
  return grads;
}

Matrix sequence_window(const Matrix& rows, std::size_t row, std::size_t length) {
  if (length == 0) throw DomainError("sequence length must be positive");
  if (row >= rows.rows()) throw DomainError("sequence_window: row out of range");
  Matrix seq(length, rows.cols());
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t back = length - 1 - t;
    if (back > row) continue;
    const auto src = rows.row(row - back);
    std::copy(src.begin(), src.end(), seq.row(t).begin());
  }
  return seq;
}

namespace {

std::vector<std::span<double>> classifier_params(LstmClassifier& model) {
  std::vector<std::span<double>> out;
  for (auto& cell : model.layers) {
    out.emplace_back(cell.input_weights.values());
    out.emplace_back(cell.recurrent_weights.values());
    out.emplace_back(cell.bias);
  }
  out.emplace_back(model.head.weights.values());
  out.emplace_back(model.head.bias);
  return out;
}

std::vector<std::span<double>> grad_views(ClassifierGrads& g) {
  std::vector<std::span<double>> out;
  for (auto& cell : g.layers) {
    out.emplace_back(cell.input_weights.values());
    out.emplace_back(cell.recurrent_weights.values());
    out.emplace_back(cell.bias);
  }
  out.emplace_back(g.head_weights.values());
  out.emplace_back(g.head_bias);
  return out;
}

}  // namespace

TrainHistory train_classifier(LstmClassifier& model, const Matrix& inputs, std::span<const int> labels,
                              const ClassifierTrainConfig& config, SaeModel* encoder) {
  if (inputs.rows() != labels.size()) throw ShapeError("train_classifier: feature and label counts differ");
  if (config.fine_tune_encoder && encoder == nullptr) {
    throw ConfigError("fine_tune_encoder requires an encoder");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= model.num_classes()) {
      throw DomainError("label " + std::to_string(y) + " outside the classifier's classes");
    }
  }

  TrainHistory history;
  const std::size_t n = inputs.rows();
  if (config.epochs == 0 || n == 0) return history;

  const bool tune = config.fine_tune_encoder;
  Matrix frozen_latent;
  if (encoder != nullptr && !tune) frozen_latent = encode(*encoder, inputs);
  const Matrix& latent_source = encoder != nullptr && !tune ? frozen_latent : inputs;
  if (!tune && latent_source.cols() != model.input_dim()) {
    throw ShapeError("train_classifier: input width " + std::to_string(latent_source.cols()) + ", expected " +
                     std::to_string(model.input_dim()));
  }

  std::vector<std::size_t> sizes;
  for (const auto& p : classifier_params(model)) sizes.push_back(p.size());
  AdamOptimizer adam(sizes, {.learning_rate = config.learning_rate});
  AdamOptimizer encoder_adam;
  if (tune) {
    std::vector<std::size_t> enc_sizes;
    for (std::size_t l = 0; l < kSaeEncoderLayers; ++l) {
      enc_sizes.push_back(encoder->layers[l].weights.size());
      enc_sizes.push_back(encoder->layers[l].bias.size());
    }
    encoder_adam = AdamOptimizer(enc_sizes, {.learning_rate = config.learning_rate});
  }

  Rng rng(derive_seed(config.seed, 101));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  const std::size_t length = std::max<std::size_t>(1, model.sequence_length);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;

    for (std::size_t begin = 0; begin < n; begin += batch, ++batch_index) {
      const std::size_t end = std::min(n, begin + batch);
      ClassifierGrads acc = zero_grads(model);
      std::vector<DenseGrads> enc_acc;
      double batch_loss = 0.0;

      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t row = order[b];
        Matrix sequence;
        std::vector<std::pair<std::size_t, EncoderTrace>> traces;  // (step, trace)
        if (tune) {
          sequence = Matrix(length, model.input_dim());
          for (std::size_t t = 0; t < length; ++t) {
            const std::size_t back = length - 1 - t;
            if (back > row) continue;
            EncoderTrace trace = encoder_forward(*encoder, inputs.row(row - back));
            std::copy(trace.latent().begin(), trace.latent().end(), sequence.row(t).begin());
            traces.emplace_back(t, std::move(trace));
          }
        } else {
          sequence = sequence_window(latent_source, row, length);
        }

        const ForwardResult fwd = lstm_forward(model, sequence);
        if (argmax(fwd.probs) == static_cast<std::size_t>(labels[row])) ++correct;
        ClassifierGrads g = lstm_backward(model, fwd, static_cast<std::size_t>(labels[row]));
        batch_loss += g.loss;

        const auto dst = grad_views(acc);
        const auto src = grad_views(g);
        for (std::size_t i = 0; i < dst.size(); ++i) add_into(dst[i], src[i]);
        for (const auto& [t, trace] : traces) encoder_backward(*encoder, trace, g.input_grad.row(t), enc_acc);
      }

      if (!std::isfinite(batch_loss)) {
        throw NumericFailure("classifier loss became non-finite at epoch " + std::to_string(epoch + 1) +
                             ", batch " + std::to_string(batch_index + 1));
      }
      epoch_loss += batch_loss;

      const double scale = 1.0 / static_cast<double>(end - begin);
      std::vector<std::span<double>> all_grads = grad_views(acc);
      const std::size_t classifier_tensors = all_grads.size();
      for (auto& eg : enc_acc) {
        all_grads.emplace_back(eg.grad_weights.values());
        all_grads.emplace_back(eg.grad_bias);
      }
      for (const auto& t : all_grads) {
        for (double& v : t) v *= scale;
      }
      clip_global_norm(all_grads, config.clip_norm);

      std::vector<std::span<const double>> cgrads(all_grads.begin(),
                                                  all_grads.begin() + static_cast<std::ptrdiff_t>(classifier_tensors));
      adam.step(classifier_params(model), cgrads);
      if (tune) {
        std::vector<std::span<double>> eparams;
        std::vector<std::span<const double>> egrads;
        for (std::size_t l = 0; l < kSaeEncoderLayers; ++l) {
          eparams.emplace_back(encoder->layers[l].weights.values());
          eparams.emplace_back(encoder->layers[l].bias);
        }
        if (enc_acc.size() == kSaeEncoderLayers) {
          egrads.assign(all_grads.begin() + static_cast<std::ptrdiff_t>(classifier_tensors), all_grads.end());
          encoder_adam.step(eparams, egrads);
        }
      }
    }
    const auto stop = std::chrono::steady_clock::now();
    history.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    history.epoch_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
    history.epoch_seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  return history;
}

Prediction predict(const LstmClassifier& model, std::span<const double> x) {
  Matrix sequence(1, x.size(), Vector(x.begin(), x.end()));
  ForwardResult fwd = lstm_forward(model, sequence);
  return {argmax(fwd.probs), std::move(fwd.probs)};
}

std::vector<Prediction> predict_table(const LstmClassifier& model, const Matrix& encoded) {
  std::vector<Prediction> out;
  out.reserve(encoded.rows());
  const std::size_t length = std::max<std::size_t>(1, model.sequence_length);
  for (std::size_t r = 0; r < encoded.rows(); ++r) {
    ForwardResult fwd = lstm_forward(model, sequence_window(encoded, r, length));
    out.push_back({argmax(fwd.probs), std::move(fwd.probs)});
  }
  return out;
}

}  // namespace saelstm
