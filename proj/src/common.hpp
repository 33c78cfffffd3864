// Copyright 2026 The SeqGuard Authors
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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace seqguard {

using Json = nlohmann::json;

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  Validation,
  Provider,
  DimensionMismatch,
  AlreadyExists,
  Internal,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, bool retryable = false)
      : std::runtime_error(message), code_(code), retryable_(retryable) {}

  ErrorCode code() const noexcept { return code_; }
  // Only provider transport failures are retryable.
  bool retryable() const noexcept { return retryable_; }

 private:
  ErrorCode code_;
  bool retryable_;
};

enum class Label { Benign, Malicious, Unknown };

std::string_view label_name(Label label);
// Throws Error(Parse) for anything other than benign/malicious/unknown.
Label parse_label(std::string_view text);

/// 64-bit FNV-1a. Used for pattern ids and offline feature hashing, so the
/// constants are part of the on-disk format and must never change.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t seed = kFnvOffset) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::string hex64(std::uint64_t value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Pretty JSON with sorted keys and a trailing newline; the canonical on-disk
// form of every JSON artifact.
std::string dump_canonical(const Json& value);

// Outermost JSON object embedded in free text, if any.
std::optional<Json> json_object_in(std::string_view text);

}  // namespace seqguard
