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

#include <stdexcept>
#include <string>

namespace saelstm {

// Error classes. Every failure the library reports derives from Error so
// callers (the CLI in particular) can map a class to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside the operation's domain (class index too large, empty input...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A required column is missing, or names/counts disagree with the schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Malformed input values: unknown labels, unparseable numbers, unseen categories.
class DataError : public Error {
 public:
  using Error::Error;
};

// Training produced a NaN or Inf.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

// Invalid pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Persisted file has the wrong magic bytes or an unsupported version.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Persisted file is truncated or fails its checksum.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Caches or gradients handed back do not belong to the model.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace saelstm
