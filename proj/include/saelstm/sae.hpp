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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "saelstm/numerics.hpp"

namespace saelstm {

// Layer widths of the autoencoder, input first: three encoder layers ending
// in a 13-wide bottleneck, mirrored by three decoder layers.
inline constexpr std::array<std::size_t, 7> kSaeWidths = {13, 75, 50, 13, 50, 75, 13};
inline constexpr std::size_t kSaeEncoderLayers = 3;

struct TrainHistory {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;  // classifier runs only
  std::vector<double> epoch_seconds;

  std::size_t epochs_completed() const { return epoch_loss.size(); }
};

struct SaeModel {
  std::vector<DenseLayer> layers;  // 3 encoder, then 3 decoder
  std::uint64_t seed = 0;

  std::size_t input_width() const { return layers.front().fan_in(); }
  std::size_t latent_width() const { return layers[kSaeEncoderLayers - 1].fan_out(); }
  std::vector<LayerDescriptor> descriptors() const;
  std::size_t param_count() const;

  bool operator==(const SaeModel&) const = default;
};

// relu everywhere except the final decoder layer, which is linear. Weights
// Glorot uniform with per-layer seeds derived from seed, biases zero.
SaeModel build_sae(std::uint64_t seed);

struct SaeTrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  std::uint64_t seed = 42;
  // Greedy mode trains encoder layer k with its mirror decoder layer on the
  // frozen output of layers < k, one pair at a time, `epochs` each.
  bool layerwise = false;
};

// Adam on mean reconstruction MSE. Throws NumericFailure on a non-finite loss.
TrainHistory train_sae(SaeModel& model, const Matrix& features, const SaeTrainConfig& config);

Vector encode(const SaeModel& model, std::span<const double> x);
Matrix encode(const SaeModel& model, const Matrix& rows);
Vector decode(const SaeModel& model, std::span<const double> latent);
Vector reconstruct(const SaeModel& model, std::span<const double> x);
Matrix reconstruct(const SaeModel& model, const Matrix& rows);

// Inputs seen by each encoder layer plus the latent output, kept for backprop.
struct EncoderTrace {
  std::array<Vector, kSaeEncoderLayers + 1> activations;

  const Vector& latent() const { return activations.back(); }
};

EncoderTrace encoder_forward(const SaeModel& model, std::span<const double> x);

// Accumulates d(loss)/d(encoder params) into grads (weights, bias per encoder
// layer, in layer order) given d(loss)/d(latent).
void encoder_backward(const SaeModel& model, const EncoderTrace& trace, std::span<const double> grad_latent,
                      std::vector<DenseGrads>& grads);

enum class ImportanceMethod { kWeights, kActivations };

std::string_view to_string(ImportanceMethod method);
ImportanceMethod parse_importance_method(std::string_view name);

struct FeatureScore {
  std::string name;
  std::size_t column = 0;
  double score = 0.0;
};

// Ranks input features, scores summing to 1, descending, ties by column.
//   kWeights:     L1 norm of each column of the first encoder layer.
//   kActivations: sum_k mean|h1_k| * |W1[k][j]| over `data`, h1 being the
//                 first encoder layer's output.
// Throws SchemaError when names.size() differs from the input width.
std::vector<FeatureScore> feature_importance(const SaeModel& model, const std::vector<std::string>& names,
                                             ImportanceMethod method = ImportanceMethod::kWeights,
                                             const Matrix* data = nullptr);

}  // namespace saelstm
