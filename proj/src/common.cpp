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

#include "common.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace seqguard {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Provider: return "provider";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::AlreadyExists: return "already_exists";
    case ErrorCode::Internal: return "internal";
  }
  return "internal";
}

std::string_view label_name(Label label) {
  switch (label) {
    case Label::Benign: return "benign";
    case Label::Malicious: return "malicious";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

Label parse_label(std::string_view text) {
  if (text == "benign") return Label::Benign;
  if (text == "malicious") return Label::Malicious;
  if (text == "unknown") return Label::Unknown;
  throw Error(ErrorCode::Parse, "unknown label value '" + std::string(text) + "'");
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "read failed for '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

std::string dump_canonical(const Json& value) {
  return value.dump(2) + "\n";
}

// Extracts the outermost JSON object from free text (providers often wrap
// JSON in prose or code fences).
std::optional<Json> json_object_in(std::string_view text) {
  std::size_t open = text.find('{');
  std::size_t close = text.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  try {
    Json j = Json::parse(text.substr(open, close - open + 1));
    if (j.is_object()) return j;
  } catch (const Json::parse_error&) {
  }
  return std::nullopt;
}

}  // namespace seqguard
