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

#include "saelstm/bundle.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <span>
#include <vector>

#include "saelstm/errors.hpp"

namespace saelstm {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

struct BlockView {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  std::span<const double> values;
};

std::vector<BlockView> collect_blocks(const ModelBundle& b) {
  std::vector<BlockView> out;
  for (std::size_t l = 0; l < b.sae.layers.size(); ++l) {
    const auto& layer = b.sae.layers[l];
    const std::string p = "sae." + std::to_string(l);
    out.push_back({p + ".weights", layer.weights.rows(), layer.weights.cols(), layer.weights.values()});
    out.push_back({p + ".bias", layer.bias.size(), 1, layer.bias});
  }
  if (b.classifier) {
    const auto& c = *b.classifier;
    for (std::size_t l = 0; l < c.layers.size(); ++l) {
      const auto& cell = c.layers[l];
      const std::string p = "lstm." + std::to_string(l);
      out.push_back({p + ".input_weights", cell.input_weights.rows(), cell.input_weights.cols(),
                     cell.input_weights.values()});
      out.push_back({p + ".recurrent_weights", cell.recurrent_weights.rows(), cell.recurrent_weights.cols(),
                     cell.recurrent_weights.values()});
      out.push_back({p + ".bias", cell.bias.size(), 1, cell.bias});
    }
    out.push_back({"head.weights", c.head.weights.rows(), c.head.weights.cols(), c.head.weights.values()});
    out.push_back({"head.bias", c.head.bias.size(), 1, c.head.bias});
  }
  return out;
}

nlohmann::json metadata(const ModelBundle& b, const std::vector<BlockView>& blocks) {
  nlohmann::json sae_layers = nlohmann::json::array();
  for (const auto& l : b.sae.layers) {
    sae_layers.push_back({{"fan_in", l.fan_in()}, {"fan_out", l.fan_out()}, {"activation", to_string(l.activation)}});
  }
  nlohmann::json j = {{"manifest", b.manifest.to_json()},
                      {"sae", {{"seed", b.sae.seed}, {"layers", sae_layers}}},
                      {"config", b.config},
                      {"config_fingerprint", b.config_fingerprint}};
  if (b.classifier) {
    const auto& c = *b.classifier;
    j["classifier"] = {{"input_dim", c.input_dim()},
                       {"units", c.layers.front().units},
                       {"depth", c.layers.size()},
                       {"classes", c.num_classes()},
                       {"sequence_length", c.sequence_length}};
  } else {
    j["classifier"] = nullptr;
  }
  nlohmann::json table = nlohmann::json::array();
  for (const auto& blk : blocks) table.push_back({{"name", blk.name}, {"rows", blk.rows}, {"cols", blk.cols}});
  j["blocks"] = table;
  return j;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string serialize_bundle(const ModelBundle& bundle) {
  const auto blocks = collect_blocks(bundle);
  const std::string meta = metadata(bundle, blocks).dump();

  std::string out(kBundleMagic);
  put_u32(out, kBundleVersion);
  put_u64(out, meta.size());
  out += meta;
  for (const auto& blk : blocks) {
    put_u64(out, blk.values.size());
    for (double v : blk.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  put_u64(out, fnv1a64(out));
  return out;
}

ModelBundle deserialize_bundle(std::string_view bytes) {
  if (bytes.size() < kBundleMagic.size() || bytes.substr(0, kBundleMagic.size()) != kBundleMagic) {
    throw FormatError("not a model bundle: bad magic bytes");
  }
  std::size_t pos = kBundleMagic.size();
  auto need = [&](std::size_t n, const std::string& what) {
    if (bytes.size() - pos < n) {
      throw IntegrityError("bundle truncated in " + what + ": need " + std::to_string(n) + " bytes at offset " +
                           std::to_string(pos) + ", " + std::to_string(bytes.size() - pos) + " left");
    }
  };

  need(4, "header");
  const auto version = static_cast<std::uint32_t>(get_le(bytes, pos, 4));
  pos += 4;
  if (version != kBundleVersion) {
    throw FormatError("unsupported bundle version " + std::to_string(version) + " (expected " +
                      std::to_string(kBundleVersion) + ")");
  }
  need(8, "header");
  const std::uint64_t meta_len = get_le(bytes, pos, 8);
  pos += 8;
  need(meta_len, "metadata");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(bytes.substr(pos, meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bundle metadata is not valid JSON: ") + e.what());
  }
  pos += meta_len;

  ModelBundle b;
  try {
    b.manifest = PreprocessManifest::from_json(meta.at("manifest"));
    b.config = meta.at("config");
    b.config_fingerprint = meta.at("config_fingerprint").get<std::string>();
    b.sae.seed = meta.at("sae").at("seed").get<std::uint64_t>();
    for (const auto& l : meta.at("sae").at("layers")) {
      DenseLayer layer;
      const auto fan_in = l.at("fan_in").get<std::size_t>();
      const auto fan_out = l.at("fan_out").get<std::size_t>();
      layer.weights = Matrix(fan_out, fan_in);
      layer.bias.assign(fan_out, 0.0);
      layer.activation = parse_activation(l.at("activation").get<std::string>());
      b.sae.layers.push_back(std::move(layer));
    }
    if (b.sae.layers.size() != kSaeWidths.size() - 1) throw FormatError("bundle autoencoder has wrong depth");
    const auto& cj = meta.at("classifier");
    if (!cj.is_null()) {
      LstmClassifier c;
      const auto input_dim = cj.at("input_dim").get<std::size_t>();
      const auto units = cj.at("units").get<std::size_t>();
      const auto depth = cj.at("depth").get<std::size_t>();
      const auto classes = cj.at("classes").get<std::size_t>();
      if (depth == 0 || units == 0 || classes == 0 || input_dim == 0) throw FormatError("bundle classifier has zero dimension");
      for (std::size_t l = 0; l < depth; ++l) {
        LstmCell cell;
        cell.input_dim = l == 0 ? input_dim : units;
        cell.units = units;
        cell.input_weights = Matrix(4 * units, cell.input_dim);
        cell.recurrent_weights = Matrix(4 * units, units);
        cell.bias.assign(4 * units, 0.0);
        c.layers.push_back(std::move(cell));
      }
      c.head.weights = Matrix(classes, units);
      c.head.bias.assign(classes, 0.0);
      c.head.activation = Activation::kSoftmax;
      c.sequence_length = cj.at("sequence_length").get<std::size_t>();
      b.classifier = std::move(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bundle metadata is incomplete: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("bundle metadata is invalid: ") + e.what());
  }

  // Shapes declared in the block table must agree with the model metadata.
  const auto views = collect_blocks(b);
  const auto& table = meta.at("blocks");
  if (!table.is_array() || table.size() != views.size()) throw FormatError("bundle block table does not match the model");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& t = table[i];
    if (t.value("name", "") != views[i].name || t.value("rows", std::size_t{0}) != views[i].rows ||
        t.value("cols", std::size_t{0}) != views[i].cols) {
      throw FormatError("bundle block " + std::to_string(i) + " does not match the model shape");
    }
  }

  std::vector<std::span<double>> targets;
  for (auto& layer : b.sae.layers) {
    targets.emplace_back(layer.weights.values());
    targets.emplace_back(layer.bias);
  }
  if (b.classifier) {
    for (auto& cell : b.classifier->layers) {
      targets.emplace_back(cell.input_weights.values());
      targets.emplace_back(cell.recurrent_weights.values());
      targets.emplace_back(cell.bias);
    }
    targets.emplace_back(b.classifier->head.weights.values());
    targets.emplace_back(b.classifier->head.bias);
  }

  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string& name = views[i].name;
    need(8, "block '" + name + "'");
    const std::uint64_t count = get_le(bytes, pos, 8);
    pos += 8;
    if (count != targets[i].size()) {
      throw IntegrityError("block '" + name + "' declares " + std::to_string(count) + " values, expected " +
                           std::to_string(targets[i].size()));
    }
    need(count * 8, "block '" + name + "'");
    for (double& v : targets[i]) {
      v = std::bit_cast<double>(get_le(bytes, pos, 8));
      pos += 8;
    }
  }

  need(8, "checksum");
  const std::uint64_t stored = get_le(bytes, pos, 8);
  if (stored != fnv1a64(bytes.substr(0, pos))) throw IntegrityError("bundle checksum mismatch");
  pos += 8;
  if (pos != bytes.size()) throw IntegrityError("bundle has " + std::to_string(bytes.size() - pos) + " trailing bytes");
  return b;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  const std::string bytes = serialize_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write bundle " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing bundle " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open bundle " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_bundle(bytes);
}

}  // namespace saelstm
