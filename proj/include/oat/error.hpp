// Copyright 2026 The OAT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oat {

/// Base of every error thrown by the library. `code()` is a stable
/// machine-readable tag used in JSON error envelopes.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Malformed JSON or document structure.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse_error", message) {}
};

/// Well-formed input that does not match the expected schema.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message) : Error("schema_error", message) {}
};

/// Caller supplied an unusable argument (empty query, empty utterance, ...).
class InputError : public Error {
 public:
  explicit InputError(const std::string& message) : Error("input_error", message) {}
};

/// An operation was requested in a state that does not allow it.
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& message) : Error("protocol_error", message) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& message) : Error("range_error", message) {}
};

/// Text that does not describe a time span.
class SpanError : public Error {
 public:
  explicit SpanError(const std::string& message) : Error("span_error", message) {}
};

/// Graph cycle found where a DAG is required.
class CycleError : public Error {
 public:
  explicit CycleError(const std::string& message) : Error("cycle_error", message) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message) : Error("not_found", message) {}
};

}  // namespace oat
