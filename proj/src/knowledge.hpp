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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "annotation.hpp"
#include "corpus.hpp"
#include "miner.hpp"
#include "providers.hpp"
#include "taxonomy.hpp"

namespace seqguard {

struct KnowledgeEntry {
  Pattern pattern;
  Annotation annotation;
  std::vector<std::string> benign_case_ids;
  std::vector<std::string> malicious_case_ids;
};

struct Case {
  std::string id;
  Label label = Label::Benign;
  ActionList actions;
  std::optional<std::string> context;
  Embedding sequence_embedding;
  Embedding context_embedding;  // empty when the case has no context
};

struct KbConfig {
  std::size_t dimension = OfflineHashEmbedder::kDefaultDimension;
  std::string embedder = "offline-hash-v1";
  std::string reasoner = "offline-template";
  std::size_t k = 5;
};

enum class Channel { Sequence, Context };
std::string_view channel_name(Channel channel);

struct RetrievalHit {
  std::size_t case_index = 0;
  double similarity = 0.0;
  Channel channel = Channel::Sequence;
  Label label = Label::Benign;

  bool operator==(const RetrievalHit&) const = default;
};

/// Sequence-channel hits (descending similarity) followed by
/// context-channel hits (descending similarity). Each channel holds the
/// top-k of the benign pool and the top-k of the malicious pool.
struct RetrievalSet {
  std::vector<RetrievalHit> hits;
  bool empty() const { return hits.empty(); }
};

/// Dual-layer store: annotated patterns plus the embedded cases they came
/// from. Immutable after build/load; all queries are const and thread-safe.
class KnowledgeBase {
 public:
  static constexpr std::size_t kDefaultK = 5;

  static KnowledgeBase build(std::span<const Pattern> patterns, const Corpus& corpus,
                             const Taxonomy& taxonomy, EmbeddingProvider& embedder,
                             ReasoningProvider* reasoner, std::size_t k = kDefaultK);

  /// Writes kb.json, cases.jsonl and embeddings.bin. An existing KB in `dir`
  /// is Error(AlreadyExists) unless `force`.
  void save(const std::filesystem::path& dir, const Taxonomy& taxonomy, bool force) const;
  static KnowledgeBase load(const std::filesystem::path& dir, const Taxonomy& taxonomy);

  const KbConfig& config() const { return config_; }
  const std::vector<KnowledgeEntry>& entries() const { return entries_; }
  const std::vector<Case>& cases() const { return cases_; }
  const Case* find_case(std::string_view id) const;

  /// Entries whose pattern equals `actions`, via the hash index.
  std::vector<const KnowledgeEntry*> lookup_exact(SequenceView actions) const;
  /// Entries whose pattern is an ordered subsequence of `sequence`.
  std::vector<const KnowledgeEntry*> lookup_subsequence(SequenceView sequence) const;

  /// Top-k retrieval per channel and class pool. An empty `scope` searches
  /// every case; otherwise the pools are the union of the scoped entries'
  /// case lists. A null or empty context query skips the context channel.
  RetrievalSet retrieve_similar(const Embedding& sequence_query, const Embedding* context_query,
                                std::span<const KnowledgeEntry* const> scope,
                                std::size_t k) const;
  RetrievalSet retrieve_similar(const Embedding& sequence_query, const Embedding* context_query,
                                std::span<const KnowledgeEntry* const> scope) const {
    return retrieve_similar(sequence_query, context_query, scope, config_.k);
  }

 private:
  void build_indexes();
  void validate() const;

  KbConfig config_;
  std::vector<KnowledgeEntry> entries_;  // sorted by pattern id
  std::vector<Case> cases_;              // corpus order
  std::unordered_map<std::string, std::size_t> case_index_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> exact_index_;
  std::unordered_map<ActionId, std::vector<std::size_t>> action_index_;
};

std::uint64_t action_list_hash(SequenceView actions);

}  // namespace seqguard
