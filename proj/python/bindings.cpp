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

// Low-level bindings. JSON documents cross the boundary as strings; the
// Python package wraps them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "saelstm/bundle.hpp"
#include "saelstm/errors.hpp"
#include "saelstm/pipeline.hpp"
#include "saelstm/synthetic.hpp"

namespace py = pybind11;
using namespace saelstm;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw ShapeError("ragged rows: row " + std::to_string(r));
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::vector<double>> to_rows(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
  return out;
}

PipelineConfig config_from(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  c.merge_json(j);
  return c;
}

class Model {
 public:
  explicit Model(ModelBundle b) : bundle_(std::move(b)) {}

  static Model load(const std::filesystem::path& path) { return Model(load_bundle(path)); }
  void save(const std::filesystem::path& path) const { save_bundle(bundle_, path); }

  std::vector<std::vector<double>> encode_rows(const std::vector<std::vector<double>>& rows) const {
    return to_rows(encode(bundle_.sae, to_matrix(rows)));
  }

  py::tuple predict_rows(const std::vector<std::vector<double>>& rows) const {
    if (!bundle_.classifier) throw ConfigError("bundle has no trained classifier");
    std::vector<std::size_t> labels;
    std::vector<std::vector<double>> probs;
    for (const Prediction& p : predict_table(*bundle_.classifier, encode(bundle_.sae, to_matrix(rows)))) {
      labels.push_back(p.label);
      probs.push_back(p.probs);
    }
    return py::make_tuple(labels, probs);
  }

  std::string evaluate(const std::filesystem::path& data) const {
    return report_metrics_json(evaluate_only(bundle_, data)).dump();
  }

  std::vector<py::tuple> importance(const std::string& method,
                                    const std::optional<std::vector<std::vector<double>>>& data) const {
    const Matrix table = data ? to_matrix(*data) : Matrix{};
    std::vector<py::tuple> out;
    for (const FeatureScore& f : feature_importance(bundle_.sae, bundle_.manifest.schema.feature_names(),
                                                    parse_importance_method(method), data ? &table : nullptr)) {
      out.push_back(py::make_tuple(f.name, f.score));
    }
    return out;
  }

  std::size_t sae_params() const { return bundle_.sae.param_count(); }
  std::size_t classifier_params() const { return bundle_.classifier ? bundle_.classifier->param_count() : 0; }
  bool has_classifier() const { return bundle_.classifier.has_value(); }
  std::vector<std::string> class_labels() const { return bundle_.manifest.schema.class_labels; }
  std::vector<std::string> feature_names() const { return bundle_.manifest.schema.feature_names(); }
  std::string config() const { return bundle_.config.dump(); }
  std::string fingerprint() const { return bundle_.config_fingerprint; }

 private:
  ModelBundle bundle_;
};

}  // namespace

PYBIND11_MODULE(_saelstm, m) {
  m.doc() = "Stacked autoencoder + LSTM threat classification";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericFailure>(m, "NumericFailure", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());
  py::register_exception<InternalError>(m, "InternalError", base.ptr());

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::load, py::arg("path"))
      .def("save", &Model::save, py::arg("path"))
      .def("encode", &Model::encode_rows, py::arg("rows"), "Latent encodings of normalized rows")
      .def("predict", &Model::predict_rows, py::arg("rows"), "(labels, probabilities) for normalized rows")
      .def("_evaluate", &Model::evaluate, py::arg("data"))
      .def("importance", &Model::importance, py::arg("method") = "weights", py::arg("data") = py::none())
      .def_property_readonly("sae_params", &Model::sae_params)
      .def_property_readonly("classifier_params", &Model::classifier_params)
      .def_property_readonly("has_classifier", &Model::has_classifier)
      .def_property_readonly("class_labels", &Model::class_labels)
      .def_property_readonly("feature_names", &Model::feature_names)
      .def_property_readonly("_config", &Model::config)
      .def_property_readonly("fingerprint", &Model::fingerprint);

  m.def("_run_pipeline", [](const std::string& config, bool write_outputs) {
    PipelineConfig c = config_from(config);
    apply_environment(c);
    py::gil_scoped_release release;
    return run_pipeline(c, write_outputs).report_json.dump();
  }, py::arg("config"), py::arg("write_outputs") = true);

  m.def("_default_config", [] { return PipelineConfig{}.to_json().dump(); });

  m.def("param_counts", [] {
    py::dict d;
    d["sae"] = count_params(build_sae(0).descriptors()).per_layer;
    d["classifier"] = count_params(build_classifier().descriptors()).per_layer;
    return d;
  });

  m.def("confusion_matrix", [](const std::vector<int>& truth, const std::vector<int>& predicted, std::size_t k) {
    const ConfusionMatrix cm = confusion_matrix(truth, predicted, k);
    std::vector<std::vector<std::uint64_t>> rows(k, std::vector<std::uint64_t>(k));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) rows[i][j] = cm.at(i, j);
    }
    return rows;
  }, py::arg("truth"), py::arg("predicted"), py::arg("num_classes"));

  m.def("_classification_report", [](const std::vector<int>& truth, const std::vector<int>& predicted,
                                     const std::vector<std::string>& labels) {
    return report_metrics_json(make_report(confusion_matrix(truth, predicted, labels.size()), labels)).dump();
  }, py::arg("truth"), py::arg("predicted"), py::arg("labels"));

  m.def("weighted_average", [](const std::vector<std::tuple<double, double, double>>& per_class,
                               const std::vector<double>& supports) {
    std::vector<ClassMetrics> metrics;
    for (const auto& [p, r, f] : per_class) metrics.push_back({p, r, f, 0});
    const AverageMetrics a = weighted_average(metrics, supports);
    return std::make_tuple(a.precision, a.recall, a.f1);
  }, py::arg("per_class"), py::arg("supports"));

  m.def("softmax", [](const std::vector<double>& z) { return softmax(z); }, py::arg("logits"));

  m.def("write_synthetic", &write_synthetic_ugransome, py::arg("path"), py::arg("rows"), py::arg("seed"),
        "Write a synthetic UGRansome-format CSV");

  m.attr("ARTIFACT_VERSION") = kArtifactVersion;
  m.attr("OUTPUT_DIR_ENV") = kOutputDirEnv;
}
