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

#include "saelstm/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>

#include "saelstm/errors.hpp"
#include "saelstm/random.hpp"

namespace saelstm {

namespace {

// Re-throws the active exception with the same class and a stage prefix.
[[noreturn]] void rethrow_with_stage(const std::string& stage) {
  const std::string p = stage + ": ";
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(p + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(p + e.what());
  } catch (const DataError& e) {
    throw DataError(p + e.what());
  } catch (const NumericFailure& e) {
    throw NumericFailure(p + e.what());
  } catch (const FormatError& e) {
    throw FormatError(p + e.what());
  } catch (const IntegrityError& e) {
    throw IntegrityError(p + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(p + e.what());
  } catch (const DomainError& e) {
    throw DomainError(p + e.what());
  } catch (const InternalError& e) {
    throw InternalError(p + e.what());
  }
}

template <typename Fn>
auto stage(const std::string& name, double& seconds, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } else {
      auto out = fn();
      seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return out;
    }
  } catch (const Error&) {
    rethrow_with_stage(name);
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

std::vector<int> to_labels(const std::vector<Prediction>& preds) {
  std::vector<int> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(static_cast<int>(p.label));
  return out;
}

}  // namespace

void PipelineConfig::set_all_seeds(std::uint64_t seed) {
  split_seed = seed;
  sae.seed = seed;
  lstm.seed = seed;
}

void PipelineConfig::validate(bool check_paths) const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1), got " + std::to_string(test_fraction));
  }
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw ConfigError("subsample_fraction must lie in (0, 1], got " + std::to_string(subsample_fraction));
  }
  if (sae.batch_size == 0 || lstm.batch_size == 0) throw ConfigError("batch sizes must be positive");
  if (!(sae.learning_rate > 0.0) || !(lstm.learning_rate > 0.0)) throw ConfigError("learning rates must be positive");
  if (lstm_units == 0 || lstm_depth == 0 || sequence_length == 0) {
    throw ConfigError("lstm units, depth and sequence_length must be positive");
  }
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  if (check_paths) {
    if (data_path.empty()) throw ConfigError("no data path given");
    if (!std::filesystem::is_regular_file(data_path)) throw ConfigError("data file not found: " + data_path.string());
    if (!schema_path.empty() && !std::filesystem::is_regular_file(schema_path)) {
      throw ConfigError("schema file not found: " + schema_path.string());
    }
  }
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"data", data_path.string()},
          {"schema", schema_path.string()},
          {"output_dir", output_dir.string()},
          {"test_fraction", test_fraction},
          {"subsample_fraction", subsample_fraction},
          {"unknown_policy", std::string(to_string(unknown_policy))},
          {"drop_duplicates", drop_duplicates},
          {"seeds", {{"split", split_seed}, {"sae", sae.seed}, {"lstm", lstm.seed}}},
          {"sae",
           {{"epochs", sae.epochs},
            {"batch_size", sae.batch_size},
            {"learning_rate", sae.learning_rate},
            {"layerwise", sae.layerwise}}},
          {"lstm",
           {{"epochs", lstm.epochs},
            {"batch_size", lstm.batch_size},
            {"learning_rate", lstm.learning_rate},
            {"clip_norm", lstm.clip_norm},
            {"fine_tune_encoder", lstm.fine_tune_encoder},
            {"units", lstm_units},
            {"depth", lstm_depth},
            {"sequence_length", sequence_length}}}};
}

void PipelineConfig::merge_json(const nlohmann::json& j) {
  try {
    if (j.contains("data")) data_path = j.at("data").get<std::string>();
    if (j.contains("schema")) schema_path = j.at("schema").get<std::string>();
    if (j.contains("output_dir")) output_dir = j.at("output_dir").get<std::string>();
    read_field(j, "test_fraction", test_fraction);
    read_field(j, "subsample_fraction", subsample_fraction);
    if (j.contains("unknown_policy")) unknown_policy = parse_unknown_policy(j.at("unknown_policy").get<std::string>());
    read_field(j, "drop_duplicates", drop_duplicates);
    if (j.contains("seed")) set_all_seeds(j.at("seed").get<std::uint64_t>());
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      read_field(s, "split", split_seed);
      read_field(s, "sae", sae.seed);
      read_field(s, "lstm", lstm.seed);
    }
    if (j.contains("sae")) {
      const auto& s = j.at("sae");
      read_field(s, "epochs", sae.epochs);
      read_field(s, "batch_size", sae.batch_size);
      read_field(s, "learning_rate", sae.learning_rate);
      read_field(s, "layerwise", sae.layerwise);
    }
    if (j.contains("lstm")) {
      const auto& s = j.at("lstm");
      read_field(s, "epochs", lstm.epochs);
      read_field(s, "batch_size", lstm.batch_size);
      read_field(s, "learning_rate", lstm.learning_rate);
      read_field(s, "clip_norm", lstm.clip_norm);
      read_field(s, "fine_tune_encoder", lstm.fine_tune_encoder);
      read_field(s, "units", lstm_units);
      read_field(s, "depth", lstm_depth);
      read_field(s, "sequence_length", sequence_length);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  PipelineConfig c;
  c.merge_json(j);
  // Relative paths in a config file resolve against the file's directory.
  const auto base = path.parent_path();
  if (!c.data_path.empty() && c.data_path.is_relative()) c.data_path = base / c.data_path;
  if (!c.schema_path.empty() && c.schema_path.is_relative()) c.schema_path = base / c.schema_path;
  return c;
}

nlohmann::json PipelineConfig::model_json() const {
  nlohmann::json j = to_json();
  j.erase("output_dir");
  return j;
}

std::string PipelineConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(model_json().dump())));
  return buf;
}

void apply_environment(PipelineConfig& config) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') config.output_dir = dir;
}

nlohmann::json history_json(const TrainHistory& h) {
  nlohmann::json j = {{"epochs_completed", h.epochs_completed()}, {"loss", h.epoch_loss}};
  if (!h.epoch_accuracy.empty()) j["accuracy"] = h.epoch_accuracy;
  j["seconds"] = h.epoch_seconds;
  return j;
}

nlohmann::json make_report_json(const MetricsReport& report, const nlohmann::json& config_echo,
                                const nlohmann::json& seeds, const nlohmann::json& timings) {
  nlohmann::json j = report_metrics_json(report);
  j["config_echo"] = config_echo;
  j["seeds"] = seeds;
  j["timings"] = timings;
  j["artifact_version"] = kArtifactVersion;
  j["generated_at"] = utc_timestamp();
  return j;
}

PipelineResult run_pipeline(const PipelineConfig& config, bool write_outputs) {
  config.validate(true);
  PipelineResult result;
  nlohmann::json timings = nlohmann::json::object();
  double secs = 0.0;

  const FeatureSchema schema = stage("preprocess", secs, [&] {
    return config.schema_path.empty() ? FeatureSchema::ugransome() : FeatureSchema::load(config.schema_path);
  });
  PreprocessResult pre = stage("preprocess", secs, [&] {
    RawTable raw = parse_csv(config.data_path, schema);
    if (config.subsample_fraction < 1.0) {
      const SplitIndices keep = stratified_split_indices(raw.labels, schema.num_classes(), config.subsample_fraction,
                                                         derive_seed(config.split_seed, 7));
      raw = raw.subset(keep.test);
    }
    PreprocessOptions opts;
    opts.test_fraction = config.test_fraction;
    opts.split_seed = config.split_seed;
    opts.unknown_policy = config.unknown_policy;
    opts.drop_duplicates = config.drop_duplicates;
    return preprocess(raw, schema, opts);
  });
  timings["preprocess"] = secs;

  SaeModel sae = build_sae(config.sae.seed);
  result.sae_history = stage("train-sae", secs, [&] { return train_sae(sae, pre.train.features, config.sae); });
  timings["train_sae"] = secs;

  LstmClassifier clf =
      build_classifier(sae.latent_width(), config.lstm_units, schema.num_classes(), config.lstm.seed, config.lstm_depth);
  clf.sequence_length = config.sequence_length;
  result.lstm_history = stage("train-lstm", secs, [&] {
    if (config.lstm.fine_tune_encoder) {
      return train_classifier(clf, pre.train.features, pre.train.labels, config.lstm, &sae);
    }
    const Matrix encoded = encode(sae, pre.train.features);
    return train_classifier(clf, encoded, pre.train.labels, config.lstm);
  });
  timings["train_lstm"] = secs;

  result.report = stage("evaluate", secs, [&] {
    const auto preds = predict_table(clf, encode(sae, pre.test.features));
    const ConfusionMatrix cm = confusion_matrix(pre.test.labels, to_labels(preds), schema.num_classes());
    return make_report(cm, schema.class_labels);
  });
  timings["evaluate"] = secs;

  result.bundle.manifest = pre.manifest;
  result.bundle.sae = std::move(sae);
  result.bundle.classifier = std::move(clf);
  result.bundle.config = config.model_json();
  result.bundle.config_fingerprint = config.fingerprint();

  const nlohmann::json seeds = {{"split", config.split_seed}, {"sae", config.sae.seed}, {"lstm", config.lstm.seed}};
  result.report_json = make_report_json(result.report, config.to_json(), seeds, timings);

  if (write_outputs) {
    stage("write-outputs", secs, [&] {
      std::error_code ec;
      std::filesystem::create_directories(config.output_dir, ec);
      if (ec) throw DataError("cannot create output directory " + config.output_dir.string() + ": " + ec.message());
      const auto& dir = config.output_dir;
      save_bundle(result.bundle, dir / "model.bin");
      pre.manifest.save(dir / "manifest.json");
      write_text(dir / "sae_history.json", history_json(result.sae_history).dump(2) + "\n");
      write_text(dir / "lstm_history.json", history_json(result.lstm_history).dump(2) + "\n");
      write_text(dir / "report.json", result.report_json.dump(2) + "\n");
      write_text(dir / "report.txt", format_report_table(result.report));
      write_text(dir / "confusion_matrix.csv", confusion_csv(result.report.confusion, schema.class_labels));
    });
  }
  return result;
}

MetricsReport evaluate_bundle(const ModelBundle& bundle, const RawTable& table) {
  if (!bundle.classifier) throw ConfigError("bundle has no trained classifier");
  const ExampleTable examples = apply_manifest(table, bundle.manifest);
  const auto preds = predict_table(*bundle.classifier, encode(bundle.sae, examples.features));
  const ConfusionMatrix cm =
      confusion_matrix(examples.labels, to_labels(preds), bundle.manifest.schema.num_classes());
  return make_report(cm, bundle.manifest.schema.class_labels);
}

MetricsReport evaluate_only(const ModelBundle& bundle, const std::filesystem::path& data_path) {
  const RawTable table = parse_csv(data_path, bundle.manifest.schema);
  return evaluate_bundle(bundle, table);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericFailure*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const FormatError*>(&e) || dynamic_cast<const IntegrityError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
    return 3;
  }
  return 1;
}

}  // namespace saelstm
