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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extractor.hpp"
#include "knowledge.hpp"
#include "providers.hpp"
#include "taxonomy.hpp"

namespace seqguard {

enum class Stage { Deterministic, JustifiableKnowledge, RetrievalVote, NoSignal };
std::string_view stage_name(Stage stage);

struct CaseEvidence {
  std::string id;
  double similarity = 0.0;
  Channel channel = Channel::Sequence;
  Label label = Label::Benign;

  bool operator==(const CaseEvidence&) const = default;
};

struct Evidence {
  std::vector<std::string> patterns;  // matched pattern ids, sorted
  std::vector<CaseEvidence> cases;
  std::string reasoning;

  bool operator==(const Evidence&) const = default;
};

struct Verdict {
  std::string subject;
  Label classification = Label::Benign;
  double confidence = 0.5;
  Stage stage = Stage::NoSignal;
  Evidence evidence;
  ActionList actions;

  bool operator==(const Verdict&) const = default;
};

struct Vote {
  Label classification = Label::Malicious;
  double score_malicious = 0.0;
  double score_benign = 0.0;
  double confidence = 0.0;
};

/// Similarity-weighted vote over retrieved cases. Negative similarities
/// count as zero; ties go to malicious. `floor` bounds the confidence from
/// below when set.
Vote similarity_vote(std::span<const CaseEvidence> cases, std::optional<double> floor = {});

/// Per-file classification pipeline over a read-only knowledge base.
/// Thread-safe as long as the providers are.
class Detector {
 public:
  Detector(const Taxonomy& taxonomy, const KnowledgeBase& kb, const Providers& providers);

  Verdict classify(const ActionSequence& sequence) const;

  const Taxonomy& taxonomy() const { return taxonomy_; }
  const KnowledgeBase& kb() const { return kb_; }
  SemanticMapper* mapper() const { return providers_.mapper.get(); }

 private:
  std::optional<Verdict> ask_reasoner(const ActionSequence& s,
                                      std::span<const KnowledgeEntry* const> matched,
                                      const std::vector<CaseEvidence>& cases) const;

  const Taxonomy& taxonomy_;
  const KnowledgeBase& kb_;
  Providers providers_;
};

enum class FileStatus { Scanned, Skipped, Warning };
std::string_view file_status_name(FileStatus status);

struct FileResult {
  std::string path;  // relative to the package root, '/' separated
  FileStatus status = FileStatus::Skipped;
  std::optional<Verdict> verdict;
  std::vector<std::string> warnings;
};

/// Extracts and classifies one file. Unreadable or non-text files yield a
/// warning status rather than an error.
FileResult scan_file(const Detector& detector, const std::filesystem::path& root,
                     const std::string& relative);

struct DetectionReport {
  std::string package;
  Label classification = Label::Benign;
  std::vector<FileResult> files;
  std::size_t files_scanned = 0;
  std::size_t files_skipped = 0;
  std::size_t malicious_files = 0;
  std::map<std::string, double> timings_ms;
};

/// Python files of a package in scan order: setup.py files, then
/// __init__.py files, then the rest, each group in lexicographic path order.
std::vector<std::string> package_files(const std::filesystem::path& root);

DetectionReport scan_package(const Detector& detector, const std::filesystem::path& root,
                             std::size_t jobs = 1);

Json verdict_to_json(const Verdict& v, const Taxonomy& taxonomy);
Json report_to_json(const DetectionReport& r, const Taxonomy& taxonomy, bool with_timings = true);
std::string report_to_text(const DetectionReport& r);

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. The first exception
/// is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace seqguard
