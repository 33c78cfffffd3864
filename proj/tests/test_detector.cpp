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

#include <cmath>
#include <map>
#include <random>

#include "detector.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace seqguard;

namespace {

/// Embeds action lists by table lookup so retrieval similarities are exact
/// by construction.
class TableEmbedder : public EmbeddingProvider {
 public:
  std::map<std::string, std::vector<double>> table;
  std::string id() const override { return "table"; }
  std::size_t dimension() const override { return 8; }
  Embedding embed_actions(std::span<const std::string> actions) override {
    std::string key;
    for (const std::string& a : actions) key += a + " ";
    auto it = table.find(key);
    if (it == table.end()) throw Error(ErrorCode::Provider, "no vector for " + key);
    return normalize(it->second);
  }
  Embedding embed_text(std::string_view) override { throw Error(ErrorCode::Provider, "no text"); }
};

class CannedReasoner : public ReasoningProvider {
 public:
  explicit CannedReasoner(std::string reply, bool fail = false) : reply_(std::move(reply)), fail_(fail) {}
  std::string id() const override { return "canned"; }
  std::string complete(const std::string& prompt) override {
    last_prompt = prompt;
    if (fail_) throw Error(ErrorCode::Provider, "timeout", true);
    return reply_;
  }
  std::string last_prompt;

 private:
  std::string reply_;
  bool fail_;
};

std::vector<double> basis_mix(double first, std::size_t other) {
  std::vector<double> v(8, 0.0);
  v[0] = first;
  v[other] = std::sqrt(1.0 - first * first);
  return v;
}

/// Four malicious cases at similarity 0.8 and one benign at 0.3 to the
/// query [encode_base64, send_http_post], all covered by one justifiable
/// pattern with bias 0.9.
struct VoteScenario {
  const Taxonomy& t = Taxonomy::seed();
  std::shared_ptr<TableEmbedder> embedder = std::make_shared<TableEmbedder>();
  Corpus corpus;
  KnowledgeBase kb;
  Pattern pattern;

  VoteScenario() {
    const char* fillers[] = {"list_directory", "get_os_info", "get_username", "get_hostname", "sleep_execution"};
    std::vector<ActionSequence> cases;
    for (int i = 0; i < 5; ++i) {
      Label label = i < 4 ? Label::Malicious : Label::Benign;
      std::vector<std::string> names = {"encode_base64", fillers[i], "send_http_post"};
      cases.push_back(sgtest::seq(t, "v" + std::to_string(i), label, names));
      embedder->table["encode_base64 " + std::string(fillers[i]) + " send_http_post "] =
          basis_mix(i < 4 ? 0.8 : 0.3, 1 + i);
    }
    embedder->table["encode_base64 send_http_post "] = basis_mix(1.0, 7);
    corpus = Corpus::from_sequences(cases);
    pattern.actions = sgtest::ids(t, {"encode_base64", "send_http_post"});
    pattern.id = pattern_id(pattern.actions, t);
    pattern.kind = PatternKind::Justifiable;
    pattern.bias_ratio_residual = pattern.bias_ratio_full = 0.9;
    pattern.support = pattern.discovered_at_support = 5;
    for (const ActionSequence& s : cases) pattern.covered_ids.push_back(s.id);
    kb = KnowledgeBase::build(std::vector<Pattern>{pattern}, corpus, t, *embedder, nullptr);
  }

  ActionSequence query() const {
    return sgtest::seq(t, "q.py", Label::Unknown, {"encode_base64", "send_http_post"});
  }
};

const KnowledgeBase& shared_kb() {
  static const KnowledgeBase kb = sgtest::fixture_kb();
  return kb;
}

std::string report_json(const Detector& d, const std::string& package, std::size_t jobs) {
  DetectionReport r = scan_package(d, sgtest::fixtures() / "packages" / package, jobs);
  return report_to_json(r, d.taxonomy(), false).dump();
}

}  // namespace

TEST_CASE("similarity vote arithmetic") {
  std::vector<CaseEvidence> cases;
  for (int i = 0; i < 4; ++i) cases.push_back({"m" + std::to_string(i), 0.8, Channel::Sequence, Label::Malicious});
  cases.push_back({"b", 0.3, Channel::Sequence, Label::Benign});
  Vote v = similarity_vote(cases);
  CHECK(v.classification == Label::Malicious);
  CHECK(v.score_malicious == doctest::Approx(3.2));
  CHECK(v.score_benign == doctest::Approx(0.3));
  CHECK(v.confidence == doctest::Approx(2.9 / 3.5));
  CHECK(similarity_vote(cases, 0.9).confidence == doctest::Approx(0.9));

  std::vector<CaseEvidence> tie = {{"m", 0.5, Channel::Sequence, Label::Malicious},
                                   {"b", 0.5, Channel::Context, Label::Benign}};
  CHECK(similarity_vote(tie).classification == Label::Malicious);
  CHECK(similarity_vote(tie).confidence == 0.0);

  std::vector<CaseEvidence> negative = {{"m", -0.4, Channel::Sequence, Label::Malicious},
                                        {"b", 0.2, Channel::Sequence, Label::Benign}};
  CHECK(similarity_vote(negative).classification == Label::Benign);
  CHECK(similarity_vote(negative).score_malicious == 0.0);
}

TEST_CASE("vote argmax is invariant under positive scaling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> sim(0.0, 1.0), scale(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CaseEvidence> cases, scaled;
    double s = scale(rng);
    for (int i = 0; i < 10; ++i) {
      CaseEvidence c{"c" + std::to_string(i), sim(rng), Channel::Sequence,
                     rng() % 2 ? Label::Malicious : Label::Benign};
      cases.push_back(c);
      c.similarity *= s;
      scaled.push_back(c);
    }
    CHECK(similarity_vote(cases).classification == similarity_vote(scaled).classification);
  }
}

TEST_CASE("justifiable match uses the bias ratio as a confidence floor") {
  VoteScenario sc;
  Providers p;
  p.embedder = sc.embedder;
  Detector d(sc.t, sc.kb, p);
  Verdict v = d.classify(sc.query());
  CHECK(v.stage == Stage::RetrievalVote);
  CHECK(v.classification == Label::Malicious);
  CHECK(v.confidence == doctest::Approx(0.9));
  CHECK(v.evidence.patterns == std::vector<std::string>{sc.pattern.id});
  REQUIRE(v.evidence.cases.size() == 5);
  CHECK(v.evidence.cases[0].similarity == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(v.evidence.cases[4].similarity == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("reasoner verdicts are parsed, clipped, and fall back on bad replies") {
  VoteScenario sc;
  Providers p;
  p.embedder = sc.embedder;

  auto good = std::make_shared<CannedReasoner>(
      "Verdict follows.\n{\"classification\": \"benign\", \"confidence\": 1.7, \"reasoning\": \"test fixture\"}");
  p.reasoner = good;
  Verdict v = Detector(sc.t, sc.kb, p).classify(sc.query());
  CHECK(v.stage == Stage::JustifiableKnowledge);
  CHECK(v.classification == Label::Benign);
  CHECK(v.confidence == 1.0);
  CHECK(v.evidence.reasoning == "test fixture");
  CHECK(v.evidence.cases.size() == 5);
  CHECK(good->last_prompt.find("encode_base64 send_http_post") != std::string::npos);
  CHECK(good->last_prompt.find("rule: ") != std::string::npos);

  p.reasoner = std::make_shared<CannedReasoner>("I think it is fine.");
  Verdict f = Detector(sc.t, sc.kb, p).classify(sc.query());
  CHECK(f.stage == Stage::RetrievalVote);
  CHECK(f.confidence == doctest::Approx(0.9));

  p.reasoner = std::make_shared<CannedReasoner>("", true);
  Verdict g = Detector(sc.t, sc.kb, p).classify(sc.query());
  CHECK(g.stage == Stage::RetrievalVote);
  CHECK(g.evidence.reasoning.find("reasoner unavailable") != std::string::npos);
}

TEST_CASE("deterministic stage on the fixture knowledge base") {
  const Taxonomy& t = Taxonomy::seed();
  Detector d(t, shared_kb(), sgtest::offline_providers());
  Verdict v = d.classify(sgtest::seq(t, "x.py", Label::Unknown,
                                     {"get_env_var", "create_socket", "establish_tcp_connection",
                                      "dup_socket_stdin", "dup_socket_stdout", "dup_socket_stderr"}));
  CHECK(v.stage == Stage::Deterministic);
  CHECK(v.classification == Label::Malicious);
  CHECK(v.confidence == 1.0);
  CHECK(v.evidence.cases.empty());
  CHECK(v.evidence.reasoning.find("reverse shell: socket connection with stdio redirection") !=
        std::string::npos);

  Verdict distracted = d.classify(sgtest::seq(
      t, "y.py", Label::Unknown,
      {"create_socket", "delete_file", "establish_tcp_connection", "dup_socket_stdin", "create_thread",
       "dup_socket_stdout", "dup_socket_stderr"}));
  CHECK(distracted.classification == Label::Malicious);
  CHECK(distracted.stage == Stage::Deterministic);

  Verdict benign = d.classify(sgtest::seq(t, "z.py", Label::Unknown,
                                          {"basic_file_reading", "create_directory", "copy_file"}));
  CHECK(benign.stage == Stage::Deterministic);
  CHECK(benign.classification == Label::Benign);
  CHECK(benign.confidence == 1.0);

  std::vector<std::string> both = {"basic_file_reading", "create_directory", "copy_file",
                                   "create_socket", "dup_socket_stderr"};
  Verdict mixed = d.classify(sgtest::seq(t, "w.py", Label::Unknown, both));
  CHECK(mixed.classification == Label::Malicious);
  CHECK(mixed.evidence.patterns.size() >= 2);

  Verdict weak = d.classify(sgtest::seq(t, "u.py", Label::Unknown, {"resolve_hostname"}));
  CHECK(weak.stage == Stage::RetrievalVote);
  CHECK(weak.evidence.patterns.empty());
  CHECK_FALSE(weak.evidence.cases.empty());
}

TEST_CASE("empty knowledge base yields no_signal") {
  const Taxonomy& t = Taxonomy::seed();
  OfflineHashEmbedder embedder;
  KnowledgeBase kb = KnowledgeBase::build({}, Corpus{}, t, embedder, nullptr);
  Detector d(t, kb, sgtest::offline_providers());
  Verdict v = d.classify(sgtest::seq(t, "a.py", Label::Unknown, {"create_socket"}));
  CHECK(v.stage == Stage::NoSignal);
  CHECK(v.classification == Label::Benign);
  CHECK(v.confidence == 0.5);
  CHECK_THROWS_AS(d.classify(ActionSequence{}), Error);
}

TEST_CASE("embedder dimension must match the knowledge base") {
  Providers p;
  p.embedder = std::make_shared<OfflineHashEmbedder>(64);
  CHECK_THROWS_AS(Detector(Taxonomy::seed(), shared_kb(), p), Error);
}

TEST_CASE("fixture packages classify as labelled") {
  Detector d(Taxonomy::seed(), shared_kb(), sgtest::offline_providers());
  const std::map<std::string, Label> labels = {
      {"clean_sysadmin", Label::Benign},       {"clean_installer", Label::Benign},
      {"clean_fileops", Label::Benign},        {"clean_http", Label::Benign},
      {"clean_crypto", Label::Benign},         {"mal_revshell", Label::Malicious},
      {"mal_revshell_init", Label::Malicious}, {"mal_harvest", Label::Malicious},
      {"mal_harvest_module", Label::Malicious}, {"mal_setup_among_clean", Label::Malicious}};
  for (const auto& [name, label] : labels) {
    INFO(name);
    DetectionReport r = scan_package(d, sgtest::fixtures() / "packages" / name, 2);
    CHECK(r.classification == label);
    bool any_malicious = false;
    for (const FileResult& f : r.files) {
      if (!f.verdict || f.verdict->classification != Label::Malicious) continue;
      any_malicious = true;
      CHECK(f.verdict->stage == Stage::Deterministic);
      CHECK(f.verdict->confidence == 1.0);
    }
    CHECK(any_malicious == (label == Label::Malicious));
  }
}

TEST_CASE("malicious setup.py among clean files") {
  Detector d(Taxonomy::seed(), shared_kb(), sgtest::offline_providers());
  DetectionReport r = scan_package(d, sgtest::fixtures() / "packages" / "mal_setup_among_clean", 4);
  CHECK(r.files.size() == 20);
  CHECK(r.files.front().path == "setup.py");
  CHECK(r.classification == Label::Malicious);
  CHECK(r.malicious_files == 1);
  REQUIRE(r.files.front().verdict);
  CHECK(r.files.front().verdict->classification == Label::Malicious);
  CHECK_FALSE(r.files.front().verdict->evidence.patterns.empty());
}

TEST_CASE("binary masquerading as python is a warning") {
  Detector d(Taxonomy::seed(), shared_kb(), sgtest::offline_providers());
  DetectionReport r = scan_package(d, sgtest::fixtures() / "packages" / "clean_http", 1);
  bool found = false;
  for (const FileResult& f : r.files)
    if (f.path.ends_with("blob.py")) {
      found = true;
      CHECK(f.status == FileStatus::Warning);
      CHECK_FALSE(f.verdict.has_value());
    }
  CHECK(found);
  CHECK(r.classification == Label::Benign);
}

TEST_CASE("package ordering, empty and missing roots") {
  sgtest::TempDir dir("pkg");
  std::filesystem::create_directories(dir.path() / "b" / "sub");
  write_text_file(dir.path() / "z.py", "x = 1\n");
  write_text_file(dir.path() / "b" / "a.py", "x = 1\n");
  write_text_file(dir.path() / "b" / "sub" / "__init__.py", "\n");
  write_text_file(dir.path() / "setup.py", "\n");
  write_text_file(dir.path() / "notes.txt", "import os\nos.system('x')\n");
  CHECK(package_files(dir.path()) ==
        std::vector<std::string>{"setup.py", "b/sub/__init__.py", "b/a.py", "z.py"});

  Detector d(Taxonomy::seed(), shared_kb(), sgtest::offline_providers());
  sgtest::TempDir empty("empty");
  DetectionReport r = scan_package(d, empty.path(), 1);
  CHECK(r.classification == Label::Benign);
  CHECK(r.files.empty());
  CHECK_THROWS_AS(scan_package(d, empty.path() / "missing", 1), Error);
}

TEST_CASE("adding a file never flips a malicious package") {
  Detector d(Taxonomy::seed(), shared_kb(), sgtest::offline_providers());
  sgtest::TempDir dir("mono");
  std::filesystem::copy(sgtest::fixtures() / "packages" / "mal_revshell", dir.path(),
                        std::filesystem::copy_options::recursive);
  CHECK(scan_package(d, dir.path(), 1).classification == Label::Malicious);
  write_text_file(dir.path() / "extra.py",
                  "import os, shutil\nos.makedirs('a')\nshutil.copy('a', 'b')\nopen('c')\n");
  CHECK(scan_package(d, dir.path(), 1).classification == Label::Malicious);
}

TEST_CASE("reports are byte-identical across job counts") {
  Detector d(Taxonomy::seed(), shared_kb(), sgtest::offline_providers());
  for (const char* name : {"mal_setup_among_clean", "clean_http", "fp_remote_debugger"}) {
    std::string one = report_json(d, name, 1);
    CHECK(one == report_json(d, name, 8));
    CHECK(one == report_json(d, name, 3));
  }
}

TEST_CASE("report serializations") {
  Detector d(Taxonomy::seed(), shared_kb(), sgtest::offline_providers());
  DetectionReport r = scan_package(d, sgtest::fixtures() / "packages" / "mal_revshell", 1);
  Json j = report_to_json(r, Taxonomy::seed(), true);
  CHECK(j["classification"] == "malicious");
  CHECK(j["summary"]["files_total"] == r.files.size());
  CHECK(j["summary"]["malicious_files"] == r.malicious_files);
  CHECK(j["timings_ms"].is_object());
  CHECK(report_to_json(r, Taxonomy::seed(), false)["timings_ms"].empty());
  std::string text = report_to_text(r);
  CHECK(text.find("MALICIOUS") != std::string::npos);
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error("fail " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "fail 7");
  }
}
