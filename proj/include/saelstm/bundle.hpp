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
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "saelstm/dataflow.hpp"
#include "saelstm/lstm.hpp"
#include "saelstm/sae.hpp"

namespace saelstm {

// Binary layout, all integers little-endian:
//
//   "SAELSTM1"                    8 bytes
//   format version                u32
//   metadata length               u64
//   metadata                      UTF-8 JSON: manifest, model shapes, block table
//   per block in table order:
//     element count               u64
//     elements                    f64 x count, row-major
//   FNV-1a 64 of all prior bytes  u64
inline constexpr std::string_view kBundleMagic = "SAELSTM1";
inline constexpr std::uint32_t kBundleVersion = 1;

struct ModelBundle {
  PreprocessManifest manifest;  // schema, vocabulary, normalization stats
  SaeModel sae;
  std::optional<LstmClassifier> classifier;  // absent after SAE-only training
  nlohmann::json config = nlohmann::json::object();
  std::string config_fingerprint;

  std::uint32_t format_version() const { return kBundleVersion; }
};

std::string serialize_bundle(const ModelBundle& bundle);

// Throws FormatError on bad magic, version or metadata and IntegrityError on
// truncation or checksum mismatch. Nothing is returned on failure.
ModelBundle deserialize_bundle(std::string_view bytes);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

// FNV-1a 64.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace saelstm
