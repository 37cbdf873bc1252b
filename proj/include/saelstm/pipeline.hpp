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

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "saelstm/bundle.hpp"
#include "saelstm/dataflow.hpp"
#include "saelstm/lstm.hpp"
#include "saelstm/metrics.hpp"
#include "saelstm/sae.hpp"

namespace saelstm {

inline constexpr const char* kArtifactVersion = "saelstm-1";
inline constexpr const char* kOutputDirEnv = "SAELSTM_OUTPUT_DIR";

struct PipelineConfig {
  std::filesystem::path data_path;
  std::filesystem::path schema_path;  // empty: built-in UGRansome schema
  std::filesystem::path output_dir = "saelstm_out";

  double test_fraction = 0.2;
  // Stratified fraction of the input kept before splitting; 1 keeps everything.
  double subsample_fraction = 1.0;
  std::uint64_t split_seed = 42;
  UnknownPolicy unknown_policy = UnknownPolicy::kLenient;
  bool drop_duplicates = false;

  SaeTrainConfig sae{.epochs = 50};
  ClassifierTrainConfig lstm{.epochs = 400};
  std::size_t lstm_units = kLstmUnits;
  std::size_t lstm_depth = 1;
  std::size_t sequence_length = 1;

  void set_all_seeds(std::uint64_t seed);

  // Throws ConfigError. Paths are checked only when check_paths is set.
  void validate(bool check_paths = true) const;

  nlohmann::json to_json() const;
  // to_json() without output_dir: everything that determines the trained model.
  nlohmann::json model_json() const;
  // Fields absent from j keep their current values.
  void merge_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);

  // FNV-1a of model_json(), hex.
  std::string fingerprint() const;
};

// Replaces output_dir with $SAELSTM_OUTPUT_DIR when that is set.
void apply_environment(PipelineConfig& config);

struct PipelineResult {
  MetricsReport report;
  nlohmann::json report_json;
  TrainHistory sae_history;
  TrainHistory lstm_history;
  ModelBundle bundle;
};

// preprocess -> SAE pretrain -> encode -> LSTM train -> evaluate on the test
// split. With write_outputs, writes model.bin, manifest.json,
// sae_history.json, lstm_history.json, report.json, report.txt and
// confusion_matrix.csv into config.output_dir. Errors keep their class and
// gain a "<stage>: " prefix.
PipelineResult run_pipeline(const PipelineConfig& config, bool write_outputs = true);

// Stored vocabulary and normalization only; nothing is refitted.
MetricsReport evaluate_bundle(const ModelBundle& bundle, const RawTable& table);
MetricsReport evaluate_only(const ModelBundle& bundle, const std::filesystem::path& data_path);

// Report document. generated_at is the only wall-clock dependent field besides timings.
nlohmann::json make_report_json(const MetricsReport& report, const nlohmann::json& config_echo,
                                const nlohmann::json& seeds, const nlohmann::json& timings);

nlohmann::json history_json(const TrainHistory& history);

// Exit status for an exception escaping a command: 2 config, 3 data/schema/
// format, 4 numeric failure, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace saelstm
