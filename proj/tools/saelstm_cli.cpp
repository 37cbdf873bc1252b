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

// saelstm: command-line front end.
//
//   saelstm preprocess --data raw.csv --out-dir prep
//   saelstm train-sae  --manifest prep/manifest.json --train prep/train.csv --out sae.bin
//   saelstm encode     --bundle sae.bin --input prep/test.csv --out latent.csv
//   saelstm train-lstm --bundle sae.bin --train prep/train.csv --out model.bin
//   saelstm evaluate   --bundle model.bin --data raw_test.csv --out-dir eval
//   saelstm pipeline   --config run.json --seed 7
//   saelstm importance --bundle model.bin
//
// Exit status: 0 ok, 2 configuration error, 3 data error, 4 numeric failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "saelstm/bundle.hpp"
#include "saelstm/dataflow.hpp"
#include "saelstm/errors.hpp"
#include "saelstm/lstm.hpp"
#include "saelstm/metrics.hpp"
#include "saelstm/pipeline.hpp"
#include "saelstm/sae.hpp"
#include "saelstm/synthetic.hpp"

namespace fs = std::filesystem;
using namespace saelstm;

namespace {

// Flag value, else $SAELSTM_OUTPUT_DIR, else fallback.
fs::path output_dir(const std::string& flag, const fs::path& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return fallback;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

fs::path sibling(const fs::path& file, const std::string& name) {
  return file.has_parent_path() ? file.parent_path() / name : fs::path(name);
}

std::vector<std::string> latent_names(std::size_t width) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < width; ++i) names.push_back("z" + std::to_string(i));
  return names;
}

struct PreprocessArgs {
  std::string data, schema, out_dir;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  std::string policy = "lenient";
  bool drop_duplicates = false;
};

int run_preprocess(const PreprocessArgs& a) {
  const FeatureSchema schema = a.schema.empty() ? FeatureSchema::ugransome() : FeatureSchema::load(a.schema);
  PreprocessOptions opts;
  opts.test_fraction = a.test_fraction;
  opts.split_seed = a.seed;
  opts.unknown_policy = parse_unknown_policy(a.policy);
  opts.drop_duplicates = a.drop_duplicates;
  if (!(opts.test_fraction > 0.0 && opts.test_fraction < 1.0)) throw ConfigError("--test-fraction must lie in (0, 1)");
  const RawTable raw = parse_csv(a.data, schema);
  const PreprocessResult pre = preprocess(raw, schema, opts);
  const fs::path dir = output_dir(a.out_dir, "prep");
  ensure_dir(dir);
  pre.manifest.save(dir / "manifest.json");
  write_example_table(dir / "train.csv", pre.train, schema.feature_names());
  write_example_table(dir / "test.csv", pre.test, schema.feature_names());
  std::cout << "train " << pre.train.rows() << " rows, test " << pre.test.rows() << " rows -> " << dir.string()
            << "\n";
  return 0;
}

struct SaeArgs {
  std::string manifest, train, out;
  SaeTrainConfig config;
};

int run_train_sae(const SaeArgs& a) {
  if (a.config.batch_size == 0 || !(a.config.learning_rate > 0.0)) throw ConfigError("batch and lr must be positive");
  ModelBundle bundle;
  bundle.manifest = PreprocessManifest::load(a.manifest);
  const ExampleTable train = read_example_table(a.train);
  bundle.sae = build_sae(a.config.seed);
  const TrainHistory h = train_sae(bundle.sae, train.features, a.config);
  bundle.config = {{"sae",
                    {{"epochs", a.config.epochs},
                     {"batch_size", a.config.batch_size},
                     {"learning_rate", a.config.learning_rate},
                     {"seed", a.config.seed},
                     {"layerwise", a.config.layerwise}}}};
  char fp[17];
  std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(fnv1a64(bundle.config.dump())));
  bundle.config_fingerprint = fp;
  save_bundle(bundle, a.out);
  write_text(sibling(a.out, "sae_history.json"), history_json(h).dump(2) + "\n");
  std::cout << "sae: " << h.epochs_completed() << " epochs";
  if (!h.epoch_loss.empty()) std::cout << ", final mse " << h.epoch_loss.back();
  std::cout << "\n";
  return 0;
}

int run_encode(const std::string& bundle_path, const std::string& input, const std::string& out) {
  const ModelBundle bundle = load_bundle(bundle_path);
  ExampleTable table = read_example_table(input);
  table.features = encode(bundle.sae, table.features);
  write_example_table(out, table, latent_names(bundle.sae.latent_width()));
  return 0;
}

struct LstmArgs {
  std::string bundle, train, out;
  ClassifierTrainConfig config;
  std::size_t units = kLstmUnits;
  std::size_t depth = 1;
  std::size_t sequence_length = 1;
};

int run_train_lstm(const LstmArgs& a) {
  if (a.config.batch_size == 0 || a.units == 0 || a.depth == 0 || a.sequence_length == 0) {
    throw ConfigError("batch, units, depth and sequence length must be positive");
  }
  ModelBundle bundle = load_bundle(a.bundle);
  const ExampleTable train = read_example_table(a.train);
  LstmClassifier clf = build_classifier(bundle.sae.latent_width(), a.units, bundle.manifest.schema.num_classes(),
                                        a.config.seed, a.depth);
  clf.sequence_length = a.sequence_length;
  TrainHistory h;
  if (a.config.fine_tune_encoder) {
    h = train_classifier(clf, train.features, train.labels, a.config, &bundle.sae);
  } else {
    h = train_classifier(clf, encode(bundle.sae, train.features), train.labels, a.config);
  }
  bundle.classifier = std::move(clf);
  bundle.config["lstm"] = {{"epochs", a.config.epochs},
                           {"batch_size", a.config.batch_size},
                           {"learning_rate", a.config.learning_rate},
                           {"seed", a.config.seed},
                           {"clip_norm", a.config.clip_norm},
                           {"fine_tune_encoder", a.config.fine_tune_encoder},
                           {"units", a.units},
                           {"depth", a.depth},
                           {"sequence_length", a.sequence_length}};
  char fp[17];
  std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(fnv1a64(bundle.config.dump())));
  bundle.config_fingerprint = fp;
  save_bundle(bundle, a.out);
  write_text(sibling(a.out, "lstm_history.json"), history_json(h).dump(2) + "\n");
  std::cout << "lstm: " << h.epochs_completed() << " epochs";
  if (!h.epoch_accuracy.empty()) std::cout << ", final train accuracy " << h.epoch_accuracy.back();
  std::cout << "\n";
  return 0;
}

int run_evaluate(const std::string& bundle_path, const std::string& data, const std::string& out_dir, bool macro) {
  const ModelBundle bundle = load_bundle(bundle_path);
  const auto start = std::chrono::steady_clock::now();
  const MetricsReport report = evaluate_only(bundle, data);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json seeds = nlohmann::json::object();
  if (bundle.config.contains("seeds")) seeds = bundle.config["seeds"];
  const nlohmann::json doc = make_report_json(report, bundle.config, seeds, {{"evaluate", secs}});
  const fs::path dir = output_dir(out_dir, "eval");
  ensure_dir(dir);
  write_text(dir / "report.json", doc.dump(2) + "\n");
  write_text(dir / "report.txt", format_report_table(report, macro));
  write_text(dir / "confusion_matrix.csv", confusion_csv(report.confusion, report.labels));
  std::cout << format_report_table(report, macro);
  return 0;
}

struct PipelineArgs {
  std::string config, data, schema, out_dir, policy;
  std::optional<std::uint64_t> seed;
  std::optional<double> test_fraction, subsample;
  std::optional<std::size_t> sae_epochs, lstm_epochs, batch, depth, units, sequence_length;
  std::optional<double> lr, clip;
  bool layerwise = false, fine_tune = false, drop_duplicates = false;
};

int run_pipeline_cmd(const PipelineArgs& a) {
  PipelineConfig c = a.config.empty() ? PipelineConfig{} : PipelineConfig::load(a.config);
  apply_environment(c);
  if (!a.data.empty()) c.data_path = a.data;
  if (!a.schema.empty()) c.schema_path = a.schema;
  if (!a.out_dir.empty()) c.output_dir = a.out_dir;
  if (!a.policy.empty()) c.unknown_policy = parse_unknown_policy(a.policy);
  if (a.seed) c.set_all_seeds(*a.seed);
  if (a.test_fraction) c.test_fraction = *a.test_fraction;
  if (a.subsample) c.subsample_fraction = *a.subsample;
  if (a.sae_epochs) c.sae.epochs = *a.sae_epochs;
  if (a.lstm_epochs) c.lstm.epochs = *a.lstm_epochs;
  if (a.batch) c.sae.batch_size = c.lstm.batch_size = *a.batch;
  if (a.lr) c.sae.learning_rate = c.lstm.learning_rate = *a.lr;
  if (a.clip) c.lstm.clip_norm = *a.clip;
  if (a.depth) c.lstm_depth = *a.depth;
  if (a.units) c.lstm_units = *a.units;
  if (a.sequence_length) c.sequence_length = *a.sequence_length;
  if (a.layerwise) c.sae.layerwise = true;
  if (a.fine_tune) c.lstm.fine_tune_encoder = true;
  if (a.drop_duplicates) c.drop_duplicates = true;

  const PipelineResult r = run_pipeline(c);
  std::cout << format_report_table(r.report) << "outputs in " << c.output_dir.string() << "\n";
  return 0;
}

int run_importance(const std::string& bundle_path, const std::string& method, const std::string& data,
                   bool as_json) {
  const ModelBundle bundle = load_bundle(bundle_path);
  const ImportanceMethod m = parse_importance_method(method);
  std::optional<ExampleTable> table;
  if (m == ImportanceMethod::kActivations) {
    if (data.empty()) throw ConfigError("--method activations needs --data (a normalized table)");
    table = read_example_table(data);
  }
  const auto scores =
      feature_importance(bundle.sae, bundle.manifest.schema.feature_names(), m, table ? &table->features : nullptr);
  if (as_json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : scores) j.push_back({{"feature", s.name}, {"column", s.column}, {"score", s.score}});
    std::cout << j.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      std::printf("%2zu  %-14s %.6f\n", i + 1, scores[i].name.c_str(), scores[i].score);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAE feature extraction + LSTM classification of UGRansome netflow records"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* cmd_pre = app.add_subcommand("preprocess", "split, encode and normalize a raw CSV");
  cmd_pre->add_option("--data", pre.data, "raw CSV")->required();
  cmd_pre->add_option("--schema", pre.schema, "schema JSON (default: built-in UGRansome)");
  cmd_pre->add_option("--out-dir", pre.out_dir, "output directory");
  cmd_pre->add_option("--test-fraction", pre.test_fraction);
  cmd_pre->add_option("--seed", pre.seed);
  cmd_pre->add_option("--unknown-policy", pre.policy, "strict|lenient");
  cmd_pre->add_flag("--drop-duplicates", pre.drop_duplicates);

  SaeArgs sae;
  auto* cmd_sae = app.add_subcommand("train-sae", "pretrain the stacked autoencoder");
  cmd_sae->add_option("--manifest", sae.manifest)->required();
  cmd_sae->add_option("--train", sae.train, "normalized training table")->required();
  cmd_sae->add_option("--out", sae.out, "bundle path")->required();
  cmd_sae->add_option("--epochs", sae.config.epochs);
  cmd_sae->add_option("--batch-size", sae.config.batch_size);
  cmd_sae->add_option("--lr", sae.config.learning_rate);
  cmd_sae->add_option("--seed", sae.config.seed);
  cmd_sae->add_flag("--layerwise", sae.config.layerwise);

  std::string enc_bundle, enc_input, enc_out;
  auto* cmd_enc = app.add_subcommand("encode", "write latent encodings of a normalized table");
  cmd_enc->add_option("--bundle", enc_bundle)->required();
  cmd_enc->add_option("--input", enc_input)->required();
  cmd_enc->add_option("--out", enc_out)->required();

  LstmArgs lstm;
  auto* cmd_lstm = app.add_subcommand("train-lstm", "train the classifier on top of a pretrained encoder");
  cmd_lstm->add_option("--bundle", lstm.bundle, "bundle holding the encoder")->required();
  cmd_lstm->add_option("--train", lstm.train, "normalized training table")->required();
  cmd_lstm->add_option("--out", lstm.out, "output bundle")->required();
  cmd_lstm->add_option("--epochs", lstm.config.epochs);
  cmd_lstm->add_option("--batch-size", lstm.config.batch_size);
  cmd_lstm->add_option("--lr", lstm.config.learning_rate);
  cmd_lstm->add_option("--seed", lstm.config.seed);
  cmd_lstm->add_option("--clip", lstm.config.clip_norm);
  cmd_lstm->add_option("--units", lstm.units);
  cmd_lstm->add_option("--depth", lstm.depth);
  cmd_lstm->add_option("--sequence-length", lstm.sequence_length);
  cmd_lstm->add_flag("--fine-tune-encoder", lstm.config.fine_tune_encoder);

  std::string ev_bundle, ev_data, ev_out;
  bool ev_macro = false;
  auto* cmd_ev = app.add_subcommand("evaluate", "score a raw CSV with a trained bundle");
  cmd_ev->add_option("--bundle", ev_bundle)->required();
  cmd_ev->add_option("--data", ev_data, "raw CSV")->required();
  cmd_ev->add_option("--out-dir", ev_out);
  cmd_ev->add_flag("--macro", ev_macro, "print the macro average row");

  PipelineArgs pipe;
  auto* cmd_pipe = app.add_subcommand("pipeline", "preprocess, pretrain, train and evaluate in one run");
  cmd_pipe->add_option("--config", pipe.config, "JSON config file");
  cmd_pipe->add_option("--data", pipe.data);
  cmd_pipe->add_option("--schema", pipe.schema);
  cmd_pipe->add_option("--out-dir", pipe.out_dir);
  cmd_pipe->add_option("--unknown-policy", pipe.policy);
  cmd_pipe->add_option("--seed", pipe.seed, "sets split, sae and lstm seeds");
  cmd_pipe->add_option("--test-fraction", pipe.test_fraction);
  cmd_pipe->add_option("--subsample", pipe.subsample);
  cmd_pipe->add_option("--sae-epochs", pipe.sae_epochs);
  cmd_pipe->add_option("--lstm-epochs", pipe.lstm_epochs);
  cmd_pipe->add_option("--batch-size", pipe.batch);
  cmd_pipe->add_option("--lr", pipe.lr);
  cmd_pipe->add_option("--clip", pipe.clip);
  cmd_pipe->add_option("--units", pipe.units);
  cmd_pipe->add_option("--depth", pipe.depth);
  cmd_pipe->add_option("--sequence-length", pipe.sequence_length);
  cmd_pipe->add_flag("--layerwise", pipe.layerwise);
  cmd_pipe->add_flag("--fine-tune-encoder", pipe.fine_tune);
  cmd_pipe->add_flag("--drop-duplicates", pipe.drop_duplicates);

  std::string imp_bundle, imp_method = "weights", imp_data;
  bool imp_json = false;
  auto* cmd_imp = app.add_subcommand("importance", "rank input features by first encoder layer");
  cmd_imp->add_option("--bundle", imp_bundle)->required();
  cmd_imp->add_option("--method", imp_method, "weights|activations");
  cmd_imp->add_option("--data", imp_data, "normalized table for --method activations");
  cmd_imp->add_flag("--json", imp_json);

  std::size_t syn_rows = 3000;
  std::uint64_t syn_seed = 7;
  std::string syn_out;
  auto* cmd_syn = app.add_subcommand("synth", "write a synthetic UGRansome-format CSV");
  cmd_syn->add_option("--rows", syn_rows);
  cmd_syn->add_option("--seed", syn_seed);
  cmd_syn->add_option("--out", syn_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*cmd_pre) return run_preprocess(pre);
    if (*cmd_sae) return run_train_sae(sae);
    if (*cmd_enc) return run_encode(enc_bundle, enc_input, enc_out);
    if (*cmd_lstm) return run_train_lstm(lstm);
    if (*cmd_ev) return run_evaluate(ev_bundle, ev_data, ev_out, ev_macro);
    if (*cmd_pipe) return run_pipeline_cmd(pipe);
    if (*cmd_imp) return run_importance(imp_bundle, imp_method, imp_data, imp_json);
    if (*cmd_syn) {
      write_synthetic_ugransome(syn_out, syn_rows, syn_seed);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}
