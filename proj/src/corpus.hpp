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

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "taxonomy.hpp"

namespace seqguard {

struct SourceRef {
  std::string package;
  std::string version;
  std::string file;  // relative
  std::size_t line_start = 1;
  std::size_t line_end = 1;

  bool operator==(const SourceRef&) const = default;
};

struct ActionSequence {
  std::string id;
  Label label = Label::Unknown;
  ActionList actions;
  std::optional<std::string> context;
  std::optional<SourceRef> source;

  bool operator==(const ActionSequence&) const = default;
};

struct SplitCorpus {
  std::vector<ActionSequence> benign;
  std::vector<ActionSequence> malicious;
};

/// An ordered, validated collection of action sequences. Immutable once
/// constructed.
class Corpus {
 public:
  Corpus() = default;

  /// Parses JSONL; every error names its 1-based line.
  static Corpus load(std::string_view jsonl, const Taxonomy& taxonomy);
  static Corpus load_file(const std::string& path, const Taxonomy& taxonomy);
  /// Validates id uniqueness, non-empty actions and source refs.
  static Corpus from_sequences(std::vector<ActionSequence> sequences);

  std::string serialize(const Taxonomy& taxonomy) const;

  std::size_t size() const { return sequences_.size(); }
  bool empty() const { return sequences_.empty(); }
  const std::vector<ActionSequence>& sequences() const { return sequences_; }
  const ActionSequence& at(std::size_t i) const { return sequences_.at(i); }
  const ActionSequence* find(std::string_view id) const;
  std::size_t count(Label label) const;

 private:
  std::vector<ActionSequence> sequences_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Benign/malicious partition in corpus order. Throws Error(Validation)
/// if any sequence is labelled unknown.
SplitCorpus split_by_label(const Corpus& corpus);

Json sequence_to_json(const ActionSequence& seq, const Taxonomy& taxonomy);
ActionSequence sequence_from_json(const Json& obj, const Taxonomy& taxonomy);

}  // namespace seqguard
