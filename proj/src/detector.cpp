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

#include "detector.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace seqguard {

namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == 0) return false;
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    std::uint32_t cp = len == 1 ? c : c & (0x7F >> len);
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const KnowledgeEntry* strongest(std::span<const KnowledgeEntry* const> entries) {
  const KnowledgeEntry* best = nullptr;
  for (const KnowledgeEntry* e : entries)
    if (!best || e->pattern.bias_ratio_residual > best->pattern.bias_ratio_residual)
      best = e;
  return best;
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Deterministic: return "deterministic";
    case Stage::JustifiableKnowledge: return "justifiable_knowledge";
    case Stage::RetrievalVote: return "retrieval_vote";
    case Stage::NoSignal: return "no_signal";
  }
  return "no_signal";
}

std::string_view file_status_name(FileStatus status) {
  switch (status) {
    case FileStatus::Scanned: return "scanned";
    case FileStatus::Skipped: return "skipped";
    case FileStatus::Warning: return "warning";
  }
  return "warning";
}

Vote similarity_vote(std::span<const CaseEvidence> cases, std::optional<double> floor) {
  Vote v;
  for (const CaseEvidence& c : cases) {
    double w = std::max(0.0, c.similarity);
    (c.label == Label::Malicious ? v.score_malicious : v.score_benign) += w;
  }
  v.classification = v.score_malicious >= v.score_benign ? Label::Malicious : Label::Benign;
  double total = v.score_malicious + v.score_benign;
  v.confidence = total > 0.0 ? std::abs(v.score_malicious - v.score_benign) / total : 0.0;
  if (floor) v.confidence = std::max(v.confidence, *floor);
  v.confidence = std::clamp(v.confidence, 0.0, 1.0);
  return v;
}

Detector::Detector(const Taxonomy& taxonomy, const KnowledgeBase& kb, const Providers& providers)
    : taxonomy_(taxonomy), kb_(kb), providers_(providers) {
  if (!providers_.embedder)
    throw Error(ErrorCode::InvalidArgument, "detector needs an embedding provider");
  std::size_t dim = providers_.embedder->dimension();
  if (dim != 0 && !kb_.cases().empty() && dim != kb_.config().dimension)
    throw Error(ErrorCode::DimensionMismatch,
                "embedding provider dimension " + std::to_string(dim) +
                    " does not match knowledge base dimension " +
                    std::to_string(kb_.config().dimension));
}

Verdict Detector::classify(const ActionSequence& s) const {
  if (s.actions.empty()) throw Error(ErrorCode::InvalidArgument, "empty action sequence");
  Verdict v;
  v.subject = s.id;
  v.actions = s.actions;

  std::vector<const KnowledgeEntry*> matched = kb_.lookup_subsequence(s.actions);
  std::vector<const KnowledgeEntry*> det_mal, det_ben, just;
  for (const KnowledgeEntry* e : matched) {
    switch (e->pattern.kind) {
      case PatternKind::DeterministicMalicious: det_mal.push_back(e); break;
      case PatternKind::DeterministicBenign: det_ben.push_back(e); break;
      case PatternKind::Justifiable: just.push_back(e); break;
    }
  }

  if (!det_mal.empty() || !det_ben.empty()) {
    const auto& decisive = det_mal.empty() ? det_ben : det_mal;
    v.stage = Stage::Deterministic;
    v.confidence = 1.0;
    v.classification = det_mal.empty() ? Label::Benign : Label::Malicious;
    for (const KnowledgeEntry* e : det_mal) v.evidence.patterns.push_back(e->pattern.id);
    for (const KnowledgeEntry* e : det_ben) v.evidence.patterns.push_back(e->pattern.id);
    std::sort(v.evidence.patterns.begin(), v.evidence.patterns.end());
    const KnowledgeEntry& first = *decisive.front();
    const auto& notes = det_mal.empty() ? first.annotation.legitimate_uses
                                        : first.annotation.attack_vectors;
    v.evidence.reasoning = std::string(det_mal.empty() ? "deterministic benign" : "deterministic malicious") +
                           " pattern " + first.pattern.id + " matched: " +
                           (notes.empty() ? first.annotation.summary : notes.front());
    return v;
  }

  for (const KnowledgeEntry* e : just) v.evidence.patterns.push_back(e->pattern.id);
  std::sort(v.evidence.patterns.begin(), v.evidence.patterns.end());

  std::string note;
  RetrievalSet retrieved;
  try {
    Embedding seq = providers_.embedder->embed_actions(taxonomy_.names(s.actions));
    Embedding ctx;
    if (s.context && !s.context->empty()) ctx = providers_.embedder->embed_text(*s.context);
    retrieved = kb_.retrieve_similar(seq, ctx.empty() ? nullptr : &ctx, just);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Provider) throw;
    note = std::string("retrieval unavailable (") + e.what() + "); ";
  }
  for (const RetrievalHit& h : retrieved.hits)
    v.evidence.cases.push_back(
        {kb_.cases()[h.case_index].id, h.similarity, h.channel, h.label});

  if (just.empty() && v.evidence.cases.empty()) {
    v.stage = Stage::NoSignal;
    v.classification = Label::Benign;
    v.confidence = 0.5;
    v.evidence.reasoning = note + "no pattern matched and no similar cases were found";
    return v;
  }

  if (providers_.reasoner) {
    try {
      if (auto answer = ask_reasoner(s, just, v.evidence.cases)) {
        answer->evidence.reasoning = note + answer->evidence.reasoning;
        return *answer;
      }
      note += "reasoner reply unusable; ";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Provider) throw;
      note += std::string("reasoner unavailable (") + e.what() + "); ";
    }
  }

  v.stage = Stage::RetrievalVote;
  const KnowledgeEntry* best = strongest(just);
  if (v.evidence.cases.empty()) {
    v.classification = best->pattern.bias_class;
    v.confidence = best->pattern.bias_ratio_residual;
    v.evidence.reasoning = note + "no similar cases; bias of justifiable pattern " +
                           best->pattern.id + " decides";
    return v;
  }
  std::optional<double> floor;
  if (best) floor = std::max(0.5, best->pattern.bias_ratio_residual);
  Vote vote = similarity_vote(v.evidence.cases, floor);
  v.classification = vote.classification;
  v.confidence = vote.confidence;
  v.evidence.reasoning = note + "similarity vote: malicious " + fixed2(vote.score_malicious) +
                         ", benign " + fixed2(vote.score_benign);
  if (best) {
    v.evidence.reasoning += "; justifiable pattern " + best->pattern.id;
    if (!best->annotation.distinction_rules.empty())
      v.evidence.reasoning += " (" + best->annotation.distinction_rules.front() + ")";
  }
  return v;
}

std::optional<Verdict> Detector::ask_reasoner(const ActionSequence& s,
                                              std::span<const KnowledgeEntry* const> matched,
                                              const std::vector<CaseEvidence>& cases) const {
  std::ostringstream p;
  p << "Classify the following Python code as benign or malicious.\n\n";
  p << "Code context:\n" << (s.context ? *s.context : std::string("(none)")) << "\n\n";
  p << "Action sequence:";
  for (const std::string& n : taxonomy_.names(s.actions)) p << ' ' << n;
  p << "\n\nMatched justifiable patterns:\n";
  if (matched.empty()) p << "(none)\n";
  for (const KnowledgeEntry* e : matched) {
    p << "- " << e->pattern.id << ":";
    for (const std::string& n : taxonomy_.names(e->pattern.actions)) p << ' ' << n;
    p << " (bias " << label_name(e->pattern.bias_class) << ' '
      << fixed2(e->pattern.bias_ratio_residual) << ")\n";
    for (const std::string& rule : e->annotation.distinction_rules) p << "  rule: " << rule << '\n';
  }
  p << "\nSimilar cases:\n";
  for (const CaseEvidence& c : cases) {
    p << "- [" << label_name(c.label) << ", " << channel_name(c.channel) << ", similarity "
      << fixed2(c.similarity) << "] ";
    if (const Case* kc = kb_.find_case(c.id)) {
      for (const std::string& n : taxonomy_.names(kc->actions)) p << n << ' ';
      if (kc->context) p << "\n  context: " << kc->context->substr(0, 400);
    }
    p << '\n';
  }
  p << "\nReply with one JSON object: {\"classification\": \"benign\"|\"malicious\", "
       "\"confidence\": number in [0,1], \"reasoning\": str}.\n";

  std::string reply = providers_.reasoner->complete(p.str());
  std::optional<Json> obj = json_object_in(reply);
  if (!obj) return std::nullopt;
  auto cls = obj->find("classification");
  auto conf = obj->find("confidence");
  if (cls == obj->end() || !cls->is_string() || conf == obj->end() || !conf->is_number())
    return std::nullopt;
  std::string c = cls->get<std::string>();
  if (c != "benign" && c != "malicious") return std::nullopt;
  double confidence = conf->get<double>();
  if (!std::isfinite(confidence)) return std::nullopt;

  Verdict v;
  v.subject = s.id;
  v.actions = s.actions;
  v.stage = Stage::JustifiableKnowledge;
  v.classification = c == "malicious" ? Label::Malicious : Label::Benign;
  v.confidence = std::clamp(confidence, 0.0, 1.0);
  for (const KnowledgeEntry* e : matched) v.evidence.patterns.push_back(e->pattern.id);
  std::sort(v.evidence.patterns.begin(), v.evidence.patterns.end());
  v.evidence.cases = cases;
  auto why = obj->find("reasoning");
  if (why != obj->end() && why->is_string()) v.evidence.reasoning = why->get<std::string>();
  return v;
}

FileResult scan_file(const Detector& detector, const std::filesystem::path& root,
                     const std::string& relative) {
  FileResult r;
  r.path = relative;
  std::string source;
  try {
    source = read_text_file(root / relative);
  } catch (const Error& e) {
    r.status = FileStatus::Warning;
    r.warnings.push_back(e.what());
    return r;
  }
  if (!valid_utf8(source)) {
    r.status = FileStatus::Warning;
    r.warnings.push_back("not a UTF-8 text file");
    return r;
  }
  FileExtraction fx = extract_file(relative, source, detector.taxonomy(), detector.mapper());
  if (!fx.mapped) {
    r.status = FileStatus::Skipped;
    return r;
  }
  r.warnings = fx.mapped->warnings;
  r.verdict = detector.classify(fx.mapped->sequence);
  r.status = FileStatus::Scanned;
  return r;
}

std::vector<std::string> package_files(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw Error(ErrorCode::Io, "package root '" + root.string() + "' is not a directory");
  std::vector<std::pair<int, std::string>> found;
  for (fs::recursive_directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file(ec) || it->path().extension() != ".py") continue;
    std::string name = it->path().filename().string();
    int group = name == "setup.py" ? 0 : name == "__init__.py" ? 1 : 2;
    found.emplace_back(group, fs::relative(it->path(), root).generic_string());
  }
  if (ec) throw Error(ErrorCode::Io, "cannot walk '" + root.string() + "': " + ec.message());
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::size_t first_index = n;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

DetectionReport scan_package(const Detector& detector, const std::filesystem::path& root,
                             std::size_t jobs) {
  auto start = std::chrono::steady_clock::now();
  DetectionReport report;
  report.package = root.generic_string();
  std::vector<std::string> files = package_files(root);
  report.files.resize(files.size());
  parallel_for(files.size(), jobs,
               [&](std::size_t i) { report.files[i] = scan_file(detector, root, files[i]); });
  for (const FileResult& f : report.files) {
    if (f.status == FileStatus::Scanned) {
      ++report.files_scanned;
      if (f.verdict->classification == Label::Malicious) ++report.malicious_files;
    } else {
      ++report.files_skipped;
    }
  }
  report.classification = report.malicious_files > 0 ? Label::Malicious : Label::Benign;
  report.timings_ms["total"] = elapsed_ms(start);
  return report;
}

Json verdict_to_json(const Verdict& v, const Taxonomy& taxonomy) {
  Json cases = Json::array();
  for (const CaseEvidence& c : v.evidence.cases)
    cases.push_back({{"id", c.id},
                     {"similarity", c.similarity},
                     {"channel", channel_name(c.channel)},
                     {"class", label_name(c.label)}});
  return {{"classification", label_name(v.classification)},
          {"confidence", v.confidence},
          {"stage", stage_name(v.stage)},
          {"evidence",
           {{"patterns", v.evidence.patterns}, {"cases", cases}, {"reasoning", v.evidence.reasoning}}},
          {"actions", taxonomy.names(v.actions)}};
}

Json report_to_json(const DetectionReport& r, const Taxonomy& taxonomy, bool with_timings) {
  Json files = Json::array();
  for (const FileResult& f : r.files) {
    Json j = {{"path", f.path}, {"status", file_status_name(f.status)}};
    if (f.verdict) j["verdict"] = verdict_to_json(*f.verdict, taxonomy);
    if (!f.warnings.empty()) j["warning"] = f.warnings.front();
    if (f.warnings.size() > 1) j["warnings"] = f.warnings;
    files.push_back(std::move(j));
  }
  Json out = {{"package", r.package},
              {"classification", label_name(r.classification)},
              {"files", files},
              {"summary",
               {{"files_total", r.files.size()},
                {"files_scanned", r.files_scanned},
                {"files_skipped", r.files_skipped},
                {"malicious_files", r.malicious_files}}}};
  out["timings_ms"] = Json::object();
  if (with_timings)
    for (const auto& [k, ms] : r.timings_ms) out["timings_ms"][k] = ms;
  return out;
}

std::string report_to_text(const DetectionReport& r) {
  std::ostringstream out;
  out << "package: " << r.package << '\n';
  out << "classification: " << label_name(r.classification) << '\n';
  out << "files: " << r.files.size() << " total, " << r.files_scanned << " scanned, "
      << r.files_skipped << " skipped, " << r.malicious_files << " malicious\n";
  for (const FileResult& f : r.files) {
    if (f.verdict) {
      const Verdict& v = *f.verdict;
      out << "  " << (v.classification == Label::Malicious ? "MALICIOUS" : "benign   ") << ' '
          << f.path << " (" << stage_name(v.stage) << ", " << fixed2(v.confidence) << ")";
      if (!v.evidence.patterns.empty()) {
        out << " patterns:";
        for (const std::string& id : v.evidence.patterns) out << ' ' << id;
      }
      out << '\n';
      if (v.classification == Label::Malicious && !v.evidence.reasoning.empty())
        out << "      " << v.evidence.reasoning << '\n';
    } else {
      out << "  " << (f.status == FileStatus::Warning ? "warning  " : "skipped  ") << ' ' << f.path;
      if (!f.warnings.empty()) out << ": " << f.warnings.front();
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace seqguard
