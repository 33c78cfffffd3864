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

#include <algorithm>
#include <random>

#include "annotation.hpp"
#include "doctest.h"
#include "knowledge.hpp"
#include "miner.hpp"
#include "support.hpp"

using namespace seqguard;

namespace {

using sgtest::fixture_corpus;

std::vector<Pattern> fixture_patterns(const Corpus& corpus) {
  return to_pattern_file(hierarchical_mine(corpus, sgtest::fixture_mining_config(), Taxonomy::seed()))
      .patterns;
}

std::vector<double> widen(const Embedding& e) { return {e.values.begin(), e.values.end()}; }

double norm(const Embedding& e) {
  double s = 0;
  for (float v : e.values) s += double(v) * double(v);
  return std::sqrt(s);
}

std::vector<std::string> entry_ids(const std::vector<const KnowledgeEntry*>& v) {
  std::vector<std::string> out;
  for (const KnowledgeEntry* e : v) out.push_back(e->pattern.id);
  return out;
}

struct Pools {
  std::vector<std::size_t> benign, malicious;
};

/// Top-k per channel and pool by sorting every case's cosine (full scan).
std::vector<RetrievalHit> scan_oracle(const KnowledgeBase& kb, const std::vector<double>& q,
                                      const std::vector<double>* ctx, const Pools& pools,
                                      std::size_t k) {
  std::vector<RetrievalHit> out;
  for (Channel ch : {Channel::Sequence, Channel::Context}) {
    if (ch == Channel::Context && !ctx) continue;
    std::vector<RetrievalHit> channel;
    for (const auto* pool : {&pools.benign, &pools.malicious}) {
      std::vector<RetrievalHit> all;
      for (std::size_t i : *pool) {
        const Case& c = kb.cases()[i];
        const Embedding& e = ch == Channel::Sequence ? c.sequence_embedding : c.context_embedding;
        if (e.empty()) continue;
        all.push_back({i, sgtest::EmbeddingOracle::cosine(ch == Channel::Sequence ? q : *ctx, widen(e)),
                       ch, c.label});
      }
      std::sort(all.begin(), all.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        return a.similarity != b.similarity ? a.similarity > b.similarity
                                            : a.case_index < b.case_index;
      });
      if (all.size() > k) all.resize(k);
      channel.insert(channel.end(), all.begin(), all.end());
    }
    std::sort(channel.begin(), channel.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity
                                          : a.case_index < b.case_index;
    });
    out.insert(out.end(), channel.begin(), channel.end());
  }
  return out;
}

void check_hits_match(const std::vector<RetrievalHit>& got, const std::vector<RetrievalHit>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].case_index == want[i].case_index);
    CHECK(got[i].channel == want[i].channel);
    CHECK(got[i].label == want[i].label);
    CHECK(got[i].similarity == doctest::Approx(want[i].similarity).epsilon(1e-9));
  }
}

}  // namespace

TEST_CASE("offline embedding matches an independent hashing oracle") {
  OfflineHashEmbedder embedder;
  sgtest::EmbeddingOracle oracle;
  std::vector<std::string> a = {"create_socket", "establish_tcp_connection", "dup_socket_stdin",
                                "dup_socket_stdout", "dup_socket_stderr"};
  std::vector<std::string> b = {"get_env_var", "create_socket", "establish_tcp_connection",
                                "spawn_process_shell"};
  Embedding ea = embedder.embed_actions(a), eb = embedder.embed_actions(b);
  CHECK(ea == embedder.embed_actions(a));
  CHECK(cosine(ea, ea) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(norm(ea) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(norm(eb) == doctest::Approx(1.0).epsilon(1e-6));
  double want = oracle.cosine(oracle.stored(oracle.actions(a)), oracle.stored(oracle.actions(b)));
  CHECK(std::abs(cosine(ea, eb) - want) <= 1e-9);
  CHECK(cosine(ea, eb) == cosine(eb, ea));

  std::string x = "import socket\n  s = socket.socket()\ns.connect((host, port))";
  std::string y = "os.dup2(s.fileno(),   0)\n\tpty.spawn('/bin/sh')";
  Embedding tx = embedder.embed_text(x), ty = embedder.embed_text(y);
  CHECK(widen(tx) == oracle.stored(oracle.text(x)));
  double want_text = oracle.cosine(oracle.stored(oracle.text(x)), oracle.stored(oracle.text(y)));
  CHECK(std::abs(cosine(tx, ty) - want_text) <= 1e-9);
}

TEST_CASE("inputs without features map to the reserved basis vector") {
  OfflineHashEmbedder embedder;
  Embedding e = embedder.embed_text("ab");
  CHECK(e.values[0] == 1.0f);
  CHECK(norm(e) == doctest::Approx(1.0));
  CHECK(embedder.embed_actions(std::vector<std::string>{}).values[0] == 1.0f);
  CHECK_THROWS_AS(OfflineHashEmbedder(1), Error);
}

TEST_CASE("template annotations follow the kind rules") {
  const Taxonomy& t = Taxonomy::seed();
  Pattern p;
  p.actions = sgtest::ids(t, {"create_socket", "establish_tcp_connection", "dup_socket_stdin",
                              "dup_socket_stdout", "dup_socket_stderr"});
  p.kind = PatternKind::DeterministicMalicious;
  p.bias_ratio_residual = p.bias_ratio_full = 1.0;
  Annotation a = template_annotation(p, {}, t);
  CHECK(a.attack_vectors ==
        std::vector<std::string>{"reverse shell: socket connection with stdio redirection"});
  CHECK(a.legitimate_uses.empty());
  CHECK(annotation_satisfies(a, p.kind));

  Pattern b;
  b.actions = sgtest::ids(t, {"basic_file_reading", "create_directory"});
  b.kind = PatternKind::DeterministicBenign;
  b.bias_class = Label::Benign;
  Annotation ab = template_annotation(b, {}, t);
  CHECK_FALSE(ab.legitimate_uses.empty());
  CHECK(ab.attack_vectors.empty());

  Pattern j;
  j.actions = sgtest::ids(t, {"encode_base64", "send_http_post"});
  j.kind = PatternKind::Justifiable;
  j.bias_ratio_residual = 0.9;
  std::vector<ActionSequence> cases;
  for (int i = 0; i < 10; ++i)
    cases.push_back(sgtest::seq(t, "j" + std::to_string(i), i < 9 ? Label::Malicious : Label::Benign,
                                {"encode_base64", "send_http_post"}));
  CasePartition part;
  for (const ActionSequence& s : cases) (s.label == Label::Benign ? part.benign : part.malicious).push_back(&s);
  Annotation aj = template_annotation(j, part, t);
  CHECK_FALSE(aj.distinction_rules.empty());
  CHECK(annotation_satisfies(aj, PatternKind::Justifiable));
  CHECK_FALSE(annotation_satisfies(Annotation{}, PatternKind::Justifiable));
}

TEST_CASE("fixture knowledge base: counts, partitions and golden annotation") {
  const Taxonomy& t = Taxonomy::seed();
  Corpus corpus = fixture_corpus();
  std::vector<Pattern> patterns = fixture_patterns(corpus);
  OfflineHashEmbedder embedder;
  KnowledgeBase kb = KnowledgeBase::build(patterns, corpus, t, embedder, nullptr);
  CHECK(kb.entries().size() == 12);
  CHECK(kb.cases().size() == 120);
  CHECK(kb.config().k == 5);
  CHECK(kb.config().dimension == 256);

  bool saw_reverse_shell = false;
  for (const KnowledgeEntry& e : kb.entries()) {
    std::set<std::string> covered(e.pattern.covered_ids.begin(), e.pattern.covered_ids.end());
    std::set<std::string> parts;
    for (const std::string& id : e.benign_case_ids) {
      CHECK(corpus.find(id)->label == Label::Benign);
      parts.insert(id);
    }
    for (const std::string& id : e.malicious_case_ids) {
      CHECK(corpus.find(id)->label == Label::Malicious);
      CHECK(parts.insert(id).second);
    }
    CHECK(parts == covered);
    if (e.pattern.kind == PatternKind::DeterministicMalicious) CHECK(e.benign_case_ids.empty());
    if (e.pattern.kind == PatternKind::DeterministicBenign) CHECK(e.malicious_case_ids.empty());
    CHECK(annotation_satisfies(e.annotation, e.pattern.kind));
    for (const std::string& v : e.annotation.attack_vectors)
      saw_reverse_shell |= v == "reverse shell: socket connection with stdio redirection";
  }
  CHECK(saw_reverse_shell);
  for (const Case& c : kb.cases()) {
    CHECK(norm(c.sequence_embedding) == doctest::Approx(1.0).epsilon(1e-6));
    if (!c.context_embedding.empty()) CHECK(norm(c.context_embedding) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("empty pattern set gives a valid empty knowledge base") {
  OfflineHashEmbedder embedder;
  Corpus corpus = fixture_corpus();
  KnowledgeBase kb = KnowledgeBase::build({}, corpus, Taxonomy::seed(), embedder, nullptr);
  CHECK(kb.entries().empty());
  CHECK(kb.cases().size() == 120);
  CHECK(kb.lookup_subsequence(corpus.at(0).actions).empty());
}

TEST_CASE("build rejects unresolved case ids and zero k") {
  const Taxonomy& t = Taxonomy::seed();
  Corpus corpus = fixture_corpus();
  std::vector<Pattern> patterns = fixture_patterns(corpus);
  patterns[0].covered_ids.push_back("no-such-case");
  OfflineHashEmbedder embedder;
  CHECK_THROWS_AS(KnowledgeBase::build(patterns, corpus, t, embedder, nullptr), Error);
  CHECK_THROWS_AS(KnowledgeBase::build({}, corpus, t, embedder, nullptr, 0), Error);
}

TEST_CASE("exact and subsequence lookups agree with linear scans") {
  const Taxonomy& t = Taxonomy::seed();
  std::mt19937_64 rng(11);
  sgtest::RetrievalFixture f = sgtest::random_retrieval_fixture(t, rng, 200, 40);
  Corpus corpus = Corpus::from_sequences(f.cases);
  OfflineHashEmbedder embedder;
  KnowledgeBase kb = KnowledgeBase::build(f.patterns, corpus, t, embedder, nullptr);

  std::uniform_int_distribution<std::uint32_t> action(0, static_cast<std::uint32_t>(t.size() - 1));
  for (int q = 0; q < 300; ++q) {
    ActionList query;
    if (q % 3 == 0) {
      query = f.patterns[rng() % f.patterns.size()].actions;
    } else {
      std::size_t n = 1 + rng() % 8;
      for (std::size_t i = 0; i < n; ++i) query.push_back(ActionId{action(rng)});
    }
    std::vector<std::string> want_exact, want_sub;
    for (const KnowledgeEntry& e : kb.entries()) {
      if (e.pattern.actions == query) want_exact.push_back(e.pattern.id);
      sgtest::Raw p, s;
      for (ActionId a : e.pattern.actions) p.push_back(a.value);
      for (ActionId a : query) s.push_back(a.value);
      if (sgtest::oracle_covers(p, s)) want_sub.push_back(e.pattern.id);
    }
    CHECK(entry_ids(kb.lookup_exact(query)) == want_exact);
    CHECK(entry_ids(kb.lookup_subsequence(query)) == want_sub);
    if (q % 3 == 0) CHECK(want_exact.size() == 1);
  }
  CHECK(kb.lookup_subsequence(ActionList{ActionId{0}}).empty());
}

TEST_CASE("subsequence lookup tolerates gaps") {
  const Taxonomy& t = Taxonomy::seed();
  std::vector<std::string> shell = {"create_socket", "establish_tcp_connection", "dup_socket_stdin",
                                    "dup_socket_stdout", "dup_socket_stderr"};
  std::vector<ActionSequence> cases;
  for (int i = 0; i < 3; ++i) cases.push_back(sgtest::seq(t, "m" + std::to_string(i), Label::Malicious, shell));
  cases.push_back(sgtest::seq(t, "b0", Label::Benign, {"get_env_var"}));
  Pattern p;
  p.actions = sgtest::ids(t, shell);
  p.id = pattern_id(p.actions, t);
  p.kind = PatternKind::DeterministicMalicious;
  p.bias_ratio_residual = p.bias_ratio_full = 1.0;
  p.support = p.discovered_at_support = 3;
  p.covered_ids = {"m0", "m1", "m2"};
  OfflineHashEmbedder embedder;
  KnowledgeBase kb = KnowledgeBase::build(std::vector<Pattern>{p}, Corpus::from_sequences(cases), t, embedder, nullptr);
  ActionList query = sgtest::ids(t, {"get_env_var", "create_socket", "establish_tcp_connection",
                                     "dup_socket_stdin", "dup_socket_stdout", "dup_socket_stderr"});
  CHECK(entry_ids(kb.lookup_subsequence(query)) == std::vector<std::string>{p.id});
  CHECK(kb.lookup_exact(query).empty());
  CHECK(kb.lookup_subsequence(sgtest::ids(t, {"create_socket", "dup_socket_stderr"})).empty());
}

TEST_CASE("retrieval agrees with a full-scan cosine oracle on 200 cases") {
  const Taxonomy& t = Taxonomy::seed();
  std::mt19937_64 rng(7);
  sgtest::RetrievalFixture f = sgtest::random_retrieval_fixture(t, rng, 200, 30);
  Corpus corpus = Corpus::from_sequences(f.cases);
  OfflineHashEmbedder embedder;
  KnowledgeBase kb = KnowledgeBase::build(f.patterns, corpus, t, embedder, nullptr);
  sgtest::EmbeddingOracle oracle;

  Pools everything;
  for (std::size_t i = 0; i < kb.cases().size(); ++i)
    (kb.cases()[i].label == Label::Benign ? everything.benign : everything.malicious).push_back(i);

  for (int q = 0; q < 50; ++q) {
    const ActionSequence& src = f.cases[rng() % f.cases.size()];
    std::vector<std::string> names = t.names(src.actions);
    if (q % 2) names.push_back("get_env_var");
    std::string ctx = "import os\nx = " + std::to_string(q) + "\n" + names.front() + "()";
    Embedding qs = embedder.embed_actions(names), qc = embedder.embed_text(ctx);
    std::vector<double> os = oracle.stored(oracle.actions(names)), oc = oracle.stored(oracle.text(ctx));

    RetrievalSet whole = kb.retrieve_similar(qs, &qc, {});
    check_hits_match(whole.hits, scan_oracle(kb, os, &oc, everything, 5));

    const KnowledgeEntry* a = &kb.entries()[rng() % kb.entries().size()];
    const KnowledgeEntry* b = &kb.entries()[rng() % kb.entries().size()];
    std::vector<const KnowledgeEntry*> scope = {a, b};
    Pools scoped;
    for (std::size_t i = 0; i < kb.cases().size(); ++i) {
      const std::string& id = kb.cases()[i].id;
      bool in = false;
      for (const KnowledgeEntry* e : scope)
        in |= std::find(e->pattern.covered_ids.begin(), e->pattern.covered_ids.end(), id) !=
              e->pattern.covered_ids.end();
      if (in) (kb.cases()[i].label == Label::Benign ? scoped.benign : scoped.malicious).push_back(i);
    }
    check_hits_match(kb.retrieve_similar(qs, nullptr, scope, 3).hits,
                     scan_oracle(kb, os, nullptr, scoped, 3));
  }
}

TEST_CASE("retrieval caps at k without padding and ranks an identical case first") {
  const Taxonomy& t = Taxonomy::seed();
  std::vector<ActionSequence> cases = {
      sgtest::seq(t, "b0", Label::Benign, {"get_env_var", "spawn_process_no_shell"}),
      sgtest::seq(t, "b1", Label::Benign, {"basic_file_reading", "copy_file"}),
      sgtest::seq(t, "b2", Label::Benign, {"create_directory"}),
      sgtest::seq(t, "m0", Label::Malicious, {"create_socket", "dup_socket_stdin"}),
  };
  OfflineHashEmbedder embedder;
  KnowledgeBase kb = KnowledgeBase::build({}, Corpus::from_sequences(cases), t, embedder, nullptr);
  Embedding q = embedder.embed_actions(t.names(cases[1].actions));
  RetrievalSet r = kb.retrieve_similar(q, nullptr, {}, 5);
  REQUIRE(r.hits.size() == 4);
  CHECK(r.hits[0].case_index == 1);
  CHECK(r.hits[0].similarity == doctest::Approx(1.0).epsilon(1e-6));
  std::size_t benign = std::count_if(r.hits.begin(), r.hits.end(),
                                     [](const RetrievalHit& h) { return h.label == Label::Benign; });
  CHECK(benign == 3);
  for (std::size_t i = 1; i < r.hits.size(); ++i) CHECK(r.hits[i - 1].similarity >= r.hits[i].similarity);

  Embedding empty_ctx;
  CHECK(kb.retrieve_similar(q, &empty_ctx, {}, 5).hits.size() == 4);
  CHECK_THROWS_AS(kb.retrieve_similar(OfflineHashEmbedder(64).embed_actions(t.names(cases[0].actions)),
                                      nullptr, {}, 5),
                  Error);
}

TEST_CASE("save/load round trip answers 100 random queries identically") {
  const Taxonomy& t = Taxonomy::seed();
  std::mt19937_64 rng(3);
  sgtest::RetrievalFixture f = sgtest::random_retrieval_fixture(t, rng, 200, 25);
  OfflineHashEmbedder embedder;
  KnowledgeBase kb = KnowledgeBase::build(f.patterns, Corpus::from_sequences(f.cases), t, embedder, nullptr);
  sgtest::TempDir dir("kb");
  kb.save(dir.path() / "kb", t, false);
  KnowledgeBase loaded = KnowledgeBase::load(dir.path() / "kb", t);
  CHECK(loaded.entries().size() == kb.entries().size());
  REQUIRE(loaded.cases().size() == kb.cases().size());
  for (std::size_t i = 0; i < kb.cases().size(); ++i) {
    CHECK(loaded.cases()[i].sequence_embedding == kb.cases()[i].sequence_embedding);
    CHECK(loaded.cases()[i].context_embedding == kb.cases()[i].context_embedding);
  }

  std::uniform_int_distribution<std::uint32_t> action(0, static_cast<std::uint32_t>(t.size() - 1));
  for (int q = 0; q < 100; ++q) {
    ActionList query;
    std::size_t n = 1 + rng() % 7;
    for (std::size_t i = 0; i < n; ++i) query.push_back(ActionId{action(rng)});
    if (q % 4 == 0) query = f.patterns[rng() % f.patterns.size()].actions;
    CHECK(entry_ids(loaded.lookup_exact(query)) == entry_ids(kb.lookup_exact(query)));
    CHECK(entry_ids(loaded.lookup_subsequence(query)) == entry_ids(kb.lookup_subsequence(query)));
    Embedding qs = embedder.embed_actions(t.names(query));
    Embedding qc = embedder.embed_text("ctx " + std::to_string(q) + t.name(query[0]));
    CHECK(loaded.retrieve_similar(qs, &qc, {}).hits == kb.retrieve_similar(qs, &qc, {}).hits);
  }

  CHECK_THROWS_AS(kb.save(dir.path() / "kb", t, false), Error);
  try {
    kb.save(dir.path() / "kb", t, false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AlreadyExists);
  }
  CHECK_NOTHROW(kb.save(dir.path() / "kb", t, true));
}

TEST_CASE("load rejects corrupt embeddings") {
  const Taxonomy& t = Taxonomy::seed();
  OfflineHashEmbedder embedder;
  Corpus corpus = fixture_corpus();
  KnowledgeBase kb = KnowledgeBase::build(fixture_patterns(corpus), corpus, t, embedder, nullptr);
  sgtest::TempDir dir("kbbad");
  kb.save(dir.path(), t, true);
  std::string bin = read_text_file(dir.path() / "embeddings.bin");
  write_text_file(dir.path() / "embeddings.bin", bin.substr(0, bin.size() - 4));
  CHECK_THROWS_AS(KnowledgeBase::load(dir.path(), t), Error);
  bin[0] = 'X';
  write_text_file(dir.path() / "embeddings.bin", bin);
  CHECK_THROWS_AS(KnowledgeBase::load(dir.path(), t), Error);
}
