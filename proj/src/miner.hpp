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
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "taxonomy.hpp"

namespace seqguard {

using SequenceView = std::span<const ActionId>;

enum class PatternKind { DeterministicBenign, DeterministicMalicious, Justifiable };

std::string_view pattern_kind_name(PatternKind kind);
PatternKind parse_pattern_kind(std::string_view text);
inline bool is_deterministic(PatternKind kind) { return kind != PatternKind::Justifiable; }

struct Pattern {
  std::string id;
  ActionList actions;
  PatternKind kind = PatternKind::Justifiable;
  Label bias_class = Label::Malicious;
  // Dominant-class share among covered residual sequences at discovery.
  double bias_ratio_residual = 0.0;
  // Share of bias_class among covered sequences of the full corpus.
  double bias_ratio_full = 0.0;
  std::size_t support = 0;
  std::size_t discovered_at_support = 0;
  std::vector<std::string> covered_ids;

  bool operator==(const Pattern&) const = default;
};

struct MiningConfig {
  std::vector<std::size_t> supports{30, 25, 20, 15, 10, 7, 5, 3, 2};
  double tau = 0.9;
  std::size_t min_pattern_len = 2;

  // Throws Error(InvalidArgument).
  void validate() const;
  bool operator==(const MiningConfig&) const = default;
};

struct FrequentPattern {
  ActionList actions;
  std::size_t support = 0;
  // Indices into the mined database of the sequences containing the pattern.
  std::vector<std::uint32_t> sequences;
};

/// True iff `pattern` embeds into `sequence` in order, gaps allowed.
bool covers(SequenceView pattern, SequenceView sequence);

/// PrefixSpan over single-item sequences. Returns every pattern of length
/// >= min_len contained in at least min_support distinct sequences, in
/// lexicographic order of action ids.
std::vector<FrequentPattern> prefixspan(std::span<const SequenceView> sequences,
                                        std::size_t min_support, std::size_t min_len);
std::vector<FrequentPattern> prefixspan(std::span<const ActionSequence> sequences,
                                        std::size_t min_support, std::size_t min_len);

struct BiasRatio {
  double ratio = 0.0;
  Label dominant = Label::Malicious;
  std::size_t covered_benign = 0;
  std::size_t covered_malicious = 0;
};

/// Dominant-class share among covered sequences; ties go to malicious.
/// Throws Error(InvalidArgument) when nothing is covered.
BiasRatio max_coverage_ratio(SequenceView pattern, std::span<const ActionSequence> benign,
                             std::span<const ActionSequence> malicious);

std::string pattern_id(SequenceView actions, const Taxonomy& taxonomy);

struct DeterministicResult {
  std::vector<Pattern> patterns;
  std::vector<ActionSequence> residual_benign;
  std::vector<ActionSequence> residual_malicious;
};

DeterministicResult mine_deterministic(std::span<const ActionSequence> benign,
                                       std::span<const ActionSequence> malicious,
                                       const MiningConfig& config, const Taxonomy& taxonomy);

/// Full-corpus fields (covered_ids, bias_ratio_full) are measured against
/// full_benign/full_malicious.
std::vector<Pattern> mine_justifiable(std::span<const ActionSequence> residual_benign,
                                      std::span<const ActionSequence> residual_malicious,
                                      const MiningConfig& config, const Taxonomy& taxonomy,
                                      std::span<const ActionSequence> full_benign,
                                      std::span<const ActionSequence> full_malicious);
std::vector<Pattern> mine_justifiable(std::span<const ActionSequence> residual_benign,
                                      std::span<const ActionSequence> residual_malicious,
                                      const MiningConfig& config, const Taxonomy& taxonomy);

/// Greedy set cover over the full corpus. Output is in selection order.
std::vector<Pattern> merge_patterns(std::span<const Pattern> candidates,
                                    std::span<const ActionSequence> full_benign,
                                    std::span<const ActionSequence> full_malicious);

struct MiningStats {
  std::size_t n_benign = 0;
  std::size_t n_malicious = 0;
  std::size_t n_det = 0;
  std::size_t n_just = 0;
  std::size_t n_opt = 0;
  double coverage_benign = 0.0;
  double coverage_malicious = 0.0;
  double coverage_total = 0.0;

  bool operator==(const MiningStats&) const = default;
};

struct MiningResult {
  MiningConfig config;
  std::vector<Pattern> deterministic;
  std::vector<Pattern> justifiable;
  std::vector<Pattern> optimized;  // selection order
  std::vector<std::string> residual_benign_ids;
  std::vector<std::string> residual_malicious_ids;
  MiningStats stats;
};

MiningResult hierarchical_mine(const Corpus& corpus, const MiningConfig& config,
                               const Taxonomy& taxonomy);

/// Contents of a pattern file: the merged pattern set plus provenance.
struct PatternFile {
  MiningConfig config;
  std::vector<Pattern> patterns;  // sorted by id
  MiningStats stats;
};

Json pattern_to_json(const Pattern& p, const Taxonomy& taxonomy);
Pattern pattern_from_json(const Json& obj, const Taxonomy& taxonomy);

PatternFile to_pattern_file(const MiningResult& result);
std::string serialize_pattern_file(const PatternFile& file, const Taxonomy& taxonomy);
PatternFile parse_pattern_file(std::string_view text, const Taxonomy& taxonomy);

}  // namespace seqguard
