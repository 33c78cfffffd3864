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

// Test fixtures and independent oracles shared by the unit and acceptance
// tests. Nothing here calls into the code under test except to build inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "knowledge.hpp"
#include "miner.hpp"
#include "taxonomy.hpp"

namespace sgtest {

namespace fs = std::filesystem;

inline fs::path fixtures() { return SEQGUARD_FIXTURES_DIR; }
inline fs::path data_dir() { return SEQGUARD_DATA_DIR; }

/// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("sgtest-" + tag + "-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// Taxonomy over single-letter style names "a0".."aN" for synthetic corpora.
inline seqguard::Taxonomy letter_taxonomy(std::size_t n) {
  std::vector<seqguard::TaxonomyEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    seqguard::TaxonomyEntry e;
    e.action = "a" + std::to_string(i);
    e.category = "Code Execution";
    e.description = "synthetic action";
    entries.push_back(e);
  }
  return seqguard::Taxonomy::from_entries(entries);
}

inline seqguard::ActionList ids(const seqguard::Taxonomy& t,
                                const std::vector<std::string>& names) {
  seqguard::ActionList out;
  for (const std::string& n : names) out.push_back(t.require(n));
  return out;
}

inline seqguard::ActionSequence seq(const seqguard::Taxonomy& t, std::string id,
                                    seqguard::Label label, const std::vector<std::string>& names) {
  seqguard::ActionSequence s;
  s.id = std::move(id);
  s.label = label;
  s.actions = ids(t, names);
  return s;
}

// ---- Brute-force subsequence oracle -------------------------------------

using Raw = std::vector<std::uint32_t>;

/// Order-preserving containment by explicit index search (no greedy trick):
/// tries every strictly increasing index tuple.
inline bool oracle_covers(const Raw& p, const Raw& s, std::size_t pi = 0, std::size_t si = 0) {
  if (pi == p.size()) return true;
  for (std::size_t j = si; j < s.size(); ++j)
    if (s[j] == p[pi] && oracle_covers(p, s, pi + 1, j + 1)) return true;
  return false;
}

/// Every distinct subsequence of every sequence (length >= min_len) mapped
/// to the number of sequences containing it. Exponential; small inputs only.
inline std::map<Raw, std::size_t> oracle_frequent(const std::vector<Raw>& db, std::size_t min_support,
                                                  std::size_t min_len) {
  std::set<Raw> candidates;
  for (const Raw& s : db) {
    std::size_t n = s.size();
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      Raw sub;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) sub.push_back(s[i]);
      if (sub.size() >= min_len) candidates.insert(sub);
    }
  }
  std::map<Raw, std::size_t> out;
  for (const Raw& c : candidates) {
    std::size_t support = 0;
    for (const Raw& s : db) support += oracle_covers(c, s) ? 1 : 0;
    if (support >= min_support) out[c] = support;
  }
  return out;
}

// ---- Offline embedding oracle --------------------------------------------

/// Independent re-derivation of the offline feature-hash embedding, in
/// double precision, from its documented definition.
struct EmbeddingOracle {
  std::size_t dim = 256;

  static std::uint64_t fnv(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }
  std::size_t bucket(const std::string& f) const { return 1 + fnv(f) % (dim - 1); }

  std::vector<double> finish(std::vector<double> v) const {
    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm == 0) {
      v[0] = 1.0;
      return v;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
  }

  std::vector<double> actions(const std::vector<std::string>& names) const {
    std::vector<double> v(dim, 0.0);
    for (std::size_t i = 0; i < names.size(); ++i) {
      v[bucket("u:" + names[i])] += 1;
      if (i + 1 < names.size()) v[bucket("b:" + names[i] + "\x1f" + names[i + 1])] += 1;
    }
    return finish(v);
  }

  std::vector<double> text(const std::string& raw) const {
    std::string t;
    bool space = false;
    for (char c : raw) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        space = true;
        continue;
      }
      if (space && !t.empty()) t.push_back(' ');
      space = false;
      t.push_back(c);
    }
    std::vector<double> v(dim, 0.0);
    for (std::size_t i = 0; i + 3 <= t.size(); ++i) v[bucket("c:" + t.substr(i, 3))] += 1;
    return finish(v);
  }

  /// Vectors are persisted in single precision; mirror that rounding.
  static std::vector<double> stored(std::vector<double> v) {
    for (double& x : v) x = static_cast<double>(static_cast<float>(x));
    return v;
  }

  static double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
  }
};


// ---- Fixture knowledge base ----------------------------------------------

inline seqguard::Corpus fixture_corpus() {
  return seqguard::Corpus::load_file((fixtures() / "corpus.jsonl").string(),
                                     seqguard::Taxonomy::seed());
}

inline seqguard::MiningConfig fixture_mining_config() {
  seqguard::MiningConfig c;
  c.supports = {10, 5, 3, 2};
  return c;
}

/// Knowledge base mined from the fixture corpus with offline providers.
inline seqguard::KnowledgeBase fixture_kb() {
  const seqguard::Taxonomy& t = seqguard::Taxonomy::seed();
  seqguard::Corpus corpus = fixture_corpus();
  std::vector<seqguard::Pattern> patterns =
      seqguard::to_pattern_file(seqguard::hierarchical_mine(corpus, fixture_mining_config(), t))
          .patterns;
  seqguard::OfflineHashEmbedder embedder;
  return seqguard::KnowledgeBase::build(patterns, corpus, t, embedder, nullptr);
}

inline seqguard::Providers offline_providers() {
  seqguard::Providers p;
  p.embedder = std::make_shared<seqguard::OfflineHashEmbedder>();
  return p;
}

// ---- Random retrieval fixture --------------------------------------------

/// n labelled cases over the seed vocabulary, about half carrying a code
/// context, plus `n_patterns` two-action patterns whose coverage is computed
/// by the brute-force oracle.
struct RetrievalFixture {
  std::vector<seqguard::ActionSequence> cases;
  std::vector<seqguard::Pattern> patterns;
};

inline RetrievalFixture random_retrieval_fixture(const seqguard::Taxonomy& t, std::mt19937_64& rng,
                                                 std::size_t n, std::size_t n_patterns) {
  RetrievalFixture f;
  std::uniform_int_distribution<std::uint32_t> action(0, static_cast<std::uint32_t>(t.size() - 1));
  std::uniform_int_distribution<int> len(2, 7);
  for (std::size_t i = 0; i < n; ++i) {
    seqguard::ActionSequence s;
    s.id = "c" + std::to_string(i);
    s.label = rng() % 2 ? seqguard::Label::Malicious : seqguard::Label::Benign;
    int l = len(rng);
    for (int j = 0; j < l; ++j) s.actions.push_back(seqguard::ActionId{action(rng)});
    if (rng() % 2) {
      std::string ctx;
      for (seqguard::ActionId a : s.actions) ctx += t.name(a) + "(x)\n";
      ctx += "value = " + std::to_string(rng() % 1000);
      s.context = ctx;
    }
    f.cases.push_back(std::move(s));
  }
  std::set<Raw> seen;
  while (f.patterns.size() < n_patterns) {
    const seqguard::ActionSequence& src = f.cases[rng() % n];
    std::size_t i = rng() % src.actions.size(), j = rng() % src.actions.size();
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    Raw key{src.actions[i].value, src.actions[j].value};
    if (!seen.insert(key).second) continue;
    seqguard::Pattern p;
    p.actions = {src.actions[i], src.actions[j]};
    p.kind = seqguard::PatternKind::Justifiable;
    std::size_t mal = 0;
    for (const seqguard::ActionSequence& c : f.cases) {
      Raw cr;
      for (seqguard::ActionId a : c.actions) cr.push_back(a.value);
      if (!oracle_covers(key, cr)) continue;
      p.covered_ids.push_back(c.id);
      mal += c.label == seqguard::Label::Malicious ? 1 : 0;
    }
    p.support = p.discovered_at_support = p.covered_ids.size();
    p.bias_class = 2 * mal >= p.support ? seqguard::Label::Malicious : seqguard::Label::Benign;
    double share = static_cast<double>(mal) / static_cast<double>(p.support);
    p.bias_ratio_residual = p.bias_ratio_full = std::max(share, 1.0 - share);
    p.id = seqguard::pattern_id(p.actions, t);
    f.patterns.push_back(std::move(p));
  }
  return f;
}

}  // namespace sgtest
