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
#include <string>
#include <vector>

#include "detector.hpp"

namespace seqguard {

/// Malicious is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Undefined ratios are empty.
struct Metrics {
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

/// Throws Error(InvalidArgument) on all-zero counts.
Metrics compute_metrics(const ConfusionCounts& counts);

struct LabeledPackage {
  std::string name;  // as listed in the manifest
  std::filesystem::path path;
  Label label = Label::Benign;
};

/// JSONL manifest, one {"package": path, "label": benign|malicious} per
/// line; relative paths resolve against the manifest's directory.
std::vector<LabeledPackage> load_manifest(const std::filesystem::path& manifest);

enum class UnscannablePolicy { Benign, Malicious };
UnscannablePolicy parse_unscannable_policy(std::string_view text);

struct PackageOutcome {
  std::string package;
  Label label = Label::Benign;
  Label predicted = Label::Benign;
  bool unscannable = false;
  std::string error;
  std::string evidence_summary;
};

struct Evaluation {
  ConfusionCounts counts;
  Metrics metrics;
  std::vector<PackageOutcome> outcomes;  // manifest order
};

/// Scans every package, `jobs` packages at a time (files within a package
/// are scanned sequentially). Empty input is Error(InvalidArgument).
Evaluation evaluate_corpus(const Detector& detector, const std::vector<LabeledPackage>& packages,
                           UnscannablePolicy policy = UnscannablePolicy::Benign,
                           std::size_t jobs = 1);

Json metrics_to_json(const Evaluation& e);

}  // namespace seqguard
