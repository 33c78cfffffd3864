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

#include "evaluation.hpp"

#include <sstream>

namespace seqguard {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string summarize(const DetectionReport& r) {
  std::ostringstream out;
  out << r.malicious_files << " malicious of " << r.files_scanned << " scanned files";
  for (const FileResult& f : r.files) {
    if (!f.verdict || f.verdict->classification != r.classification) continue;
    out << "; " << f.path << " (" << stage_name(f.verdict->stage);
    if (!f.verdict->evidence.patterns.empty()) out << ", " << f.verdict->evidence.patterns.front();
    out << ")";
    break;
  }
  return out.str();
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error(ErrorCode::InvalidArgument, "confusion counts are all zero");
  Metrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

std::vector<LabeledPackage> load_manifest(const std::filesystem::path& manifest) {
  std::string text = read_text_file(manifest);
  std::filesystem::path base = manifest.parent_path();
  std::vector<LabeledPackage> out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string where = "manifest line " + std::to_string(n) + ": ";
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::Parse, where + e.what());
    }
    if (!j.is_object() || !j.contains("package") || !j["package"].is_string())
      throw Error(ErrorCode::Validation, where + "missing string field 'package'");
    if (!j.contains("label") || !j["label"].is_string())
      throw Error(ErrorCode::Validation, where + "missing label");
    LabeledPackage p;
    p.name = j["package"].get<std::string>();
    Label label = parse_label(j["label"].get<std::string>());
    if (label == Label::Unknown)
      throw Error(ErrorCode::Validation, where + "label must be benign or malicious");
    p.label = label;
    std::filesystem::path path(p.name);
    p.path = path.is_absolute() ? path : base / path;
    out.push_back(std::move(p));
  }
  return out;
}

UnscannablePolicy parse_unscannable_policy(std::string_view text) {
  if (text == "benign") return UnscannablePolicy::Benign;
  if (text == "malicious") return UnscannablePolicy::Malicious;
  throw Error(ErrorCode::InvalidArgument,
              "unscannable policy must be benign or malicious, got '" + std::string(text) + "'");
}

Evaluation evaluate_corpus(const Detector& detector, const std::vector<LabeledPackage>& packages,
                           UnscannablePolicy policy, std::size_t jobs) {
  if (packages.empty()) throw Error(ErrorCode::InvalidArgument, "evaluation corpus is empty");
  Evaluation ev;
  ev.outcomes.resize(packages.size());
  parallel_for(packages.size(), jobs, [&](std::size_t i) {
    const LabeledPackage& p = packages[i];
    PackageOutcome& o = ev.outcomes[i];
    o.package = p.name;
    o.label = p.label;
    try {
      DetectionReport r = scan_package(detector, p.path, 1);
      o.predicted = r.classification;
      o.evidence_summary = summarize(r);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Io) throw;
      o.unscannable = true;
      o.error = e.what();
      o.predicted = policy == UnscannablePolicy::Benign ? Label::Benign : Label::Malicious;
      o.evidence_summary = "unscannable: " + o.error;
    }
  });
  for (const PackageOutcome& o : ev.outcomes) {
    bool pos = o.predicted == Label::Malicious;
    if (o.label == Label::Malicious)
      ++(pos ? ev.counts.tp : ev.counts.fn);
    else
      ++(pos ? ev.counts.fp : ev.counts.tn);
  }
  ev.metrics = compute_metrics(ev.counts);
  return ev;
}

Json metrics_to_json(const Evaluation& e) {
  Json mis = Json::array();
  Json unscannable = Json::array();
  for (const PackageOutcome& o : e.outcomes) {
    if (o.label != o.predicted)
      mis.push_back({{"package", o.package},
                     {"label", label_name(o.label)},
                     {"predicted", label_name(o.predicted)},
                     {"evidence_summary", o.evidence_summary}});
    if (o.unscannable)
      unscannable.push_back({{"package", o.package},
                             {"predicted", label_name(o.predicted)},
                             {"error", o.error}});
  }
  return {{"counts",
           {{"tp", e.counts.tp}, {"fp", e.counts.fp}, {"fn", e.counts.fn}, {"tn", e.counts.tn}}},
          {"metrics",
           {{"accuracy", e.metrics.accuracy},
            {"precision", optional_json(e.metrics.precision)},
            {"recall", optional_json(e.metrics.recall)},
            {"f1", optional_json(e.metrics.f1)}}},
          {"misclassified", mis},
          {"unscannable", unscannable}};
}

}  // namespace seqguard
