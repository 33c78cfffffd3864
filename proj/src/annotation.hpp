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
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "miner.hpp"
#include "providers.hpp"
#include "taxonomy.hpp"

namespace seqguard {

struct Annotation {
  std::string summary;
  std::vector<std::string> attack_vectors;     // deterministic_malicious
  std::vector<std::string> legitimate_uses;    // deterministic_benign
  std::vector<std::string> distinction_rules;  // justifiable
  std::string source;                          // "offline-template" or a provider id
  std::optional<std::string> warning;

  bool operator==(const Annotation&) const = default;
};

/// Covered cases of a pattern, split by label.
struct CasePartition {
  std::vector<const ActionSequence*> benign;
  std::vector<const ActionSequence*> malicious;
};

/// Checks the kind-dependent non-emptiness rule.
bool annotation_satisfies(const Annotation& a, PatternKind kind);

/// Deterministic template annotation built from action names, taxonomy
/// categories and a small table of well-known attack motifs.
Annotation template_annotation(const Pattern& pattern, const CasePartition& cases,
                               const Taxonomy& taxonomy);

std::string annotation_prompt(const Pattern& pattern, const CasePartition& cases,
                              const Taxonomy& taxonomy);

/// Uses the reasoner when present; unusable replies fall back to the
/// template with `warning` set. Provider transport errors also fall back.
Annotation annotate(const Pattern& pattern, const CasePartition& cases,
                    const Taxonomy& taxonomy, ReasoningProvider* reasoner);

Json annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const Json& obj);

}  // namespace seqguard
