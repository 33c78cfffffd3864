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

#include "knowledge.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

namespace seqguard {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'K', 'B'};
constexpr std::uint32_t kEmbeddingsVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  return v;
}
std::uint64_t get_u64(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  return v;
}

void put_row(std::string& out, const Embedding& e, std::size_t dim) {
  for (std::size_t i = 0; i < dim; ++i)
    put_u32(out, e.empty() ? 0u : std::bit_cast<std::uint32_t>(e.values[i]));
}

Embedding get_row(std::string_view in, std::size_t at, std::size_t dim) {
  Embedding e;
  e.values.resize(dim);
  bool any = false;
  for (std::size_t i = 0; i < dim; ++i) {
    e.values[i] = std::bit_cast<float>(get_u32(in, at + 4 * i));
    any = any || e.values[i] != 0.0f;
  }
  if (!any) e.values.clear();
  return e;
}

Embedding embed_case_actions(EmbeddingProvider& embedder, const ActionList& actions,
                             const Taxonomy& taxonomy) {
  std::vector<std::string> names = taxonomy.names(actions);
  return embedder.embed_actions(names);
}

struct Scored {
  double similarity;
  std::size_t index;
};

bool better(const Scored& a, const Scored& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.index < b.index;
}

}  // namespace

std::string_view channel_name(Channel channel) {
  return channel == Channel::Sequence ? "sequence" : "context";
}

std::uint64_t action_list_hash(SequenceView actions) {
  std::uint64_t h = kFnvOffset;
  for (ActionId a : actions) {
    char bytes[4];
    std::memcpy(bytes, &a.value, 4);
    h = fnv1a64(std::string_view(bytes, 4), h);
  }
  return h;
}

KnowledgeBase KnowledgeBase::build(std::span<const Pattern> patterns, const Corpus& corpus,
                                   const Taxonomy& taxonomy, EmbeddingProvider& embedder,
                                   ReasoningProvider* reasoner, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "retrieval breadth k must be positive");
  KnowledgeBase kb;
  kb.config_.k = k;
  kb.config_.embedder = embedder.id();
  kb.config_.reasoner = reasoner ? reasoner->id() : "offline-template";

  kb.cases_.reserve(corpus.size());
  for (const ActionSequence& s : corpus.sequences()) {
    if (s.label == Label::Unknown)
      throw Error(ErrorCode::Validation, "case '" + s.id + "' has no benign/malicious label");
    Case c;
    c.id = s.id;
    c.label = s.label;
    c.actions = s.actions;
    c.context = s.context;
    c.sequence_embedding = embed_case_actions(embedder, s.actions, taxonomy);
    if (s.context && !s.context->empty()) c.context_embedding = embedder.embed_text(*s.context);
    kb.cases_.push_back(std::move(c));
  }
  kb.config_.dimension = kb.cases_.empty() ? embedder.dimension()
                                           : kb.cases_.front().sequence_embedding.dimension();
  for (const Case& c : kb.cases_) {
    if (c.sequence_embedding.dimension() != kb.config_.dimension ||
        (!c.context_embedding.empty() && c.context_embedding.dimension() != kb.config_.dimension))
      throw Error(ErrorCode::DimensionMismatch,
                  "embedding provider changed dimension at case '" + c.id + "'");
  }
  for (std::size_t i = 0; i < kb.cases_.size(); ++i) kb.case_index_.emplace(kb.cases_[i].id, i);

  std::vector<Pattern> sorted(patterns.begin(), patterns.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Pattern& a, const Pattern& b) { return a.id < b.id; });
  for (Pattern& p : sorted) {
    KnowledgeEntry e;
    CasePartition partition;
    for (const std::string& id : p.covered_ids) {
      const ActionSequence* s = corpus.find(id);
      if (!s)
        throw Error(ErrorCode::Validation,
                    "pattern " + p.id + " references case '" + id + "' missing from the corpus");
      if (s->label == Label::Benign) {
        e.benign_case_ids.push_back(id);
        partition.benign.push_back(s);
      } else {
        e.malicious_case_ids.push_back(id);
        partition.malicious.push_back(s);
      }
    }
    e.annotation = annotate(p, partition, taxonomy, reasoner);
    e.pattern = std::move(p);
    kb.entries_.push_back(std::move(e));
  }
  kb.validate();
  kb.build_indexes();
  return kb;
}

void KnowledgeBase::validate() const {
  std::set<std::string> ids;
  for (const KnowledgeEntry& e : entries_) {
    if (!ids.insert(e.pattern.id).second)
      throw Error(ErrorCode::Validation, "duplicate pattern " + e.pattern.id);
    std::set<std::string> covered(e.pattern.covered_ids.begin(), e.pattern.covered_ids.end());
    std::set<std::string> parts;
    for (const auto* list : {&e.benign_case_ids, &e.malicious_case_ids}) {
      Label want = list == &e.benign_case_ids ? Label::Benign : Label::Malicious;
      for (const std::string& id : *list) {
        const Case* c = find_case(id);
        if (!c) throw Error(ErrorCode::Validation, "entry " + e.pattern.id + " cites unknown case '" + id + "'");
        if (c->label != want)
          throw Error(ErrorCode::Validation, "case '" + id + "' filed under the wrong label");
        if (!parts.insert(id).second)
          throw Error(ErrorCode::Validation, "case '" + id + "' listed twice in " + e.pattern.id);
      }
    }
    if (parts != covered)
      throw Error(ErrorCode::Validation, "entry " + e.pattern.id + " case lists differ from its coverage");
  }
}

void KnowledgeBase::build_indexes() {
  exact_index_.clear();
  action_index_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const ActionList& actions = entries_[i].pattern.actions;
    exact_index_[action_list_hash(actions)].push_back(i);
    std::set<ActionId> distinct(actions.begin(), actions.end());
    for (ActionId a : distinct) action_index_[a].push_back(i);
  }
}

const Case* KnowledgeBase::find_case(std::string_view id) const {
  auto it = case_index_.find(std::string(id));
  return it == case_index_.end() ? nullptr : &cases_[it->second];
}

std::vector<const KnowledgeEntry*> KnowledgeBase::lookup_exact(SequenceView actions) const {
  std::vector<const KnowledgeEntry*> out;
  auto it = exact_index_.find(action_list_hash(actions));
  if (it == exact_index_.end()) return out;
  for (std::size_t i : it->second) {
    const ActionList& p = entries_[i].pattern.actions;
    if (std::equal(p.begin(), p.end(), actions.begin(), actions.end())) out.push_back(&entries_[i]);
  }
  return out;
}

std::vector<const KnowledgeEntry*> KnowledgeBase::lookup_subsequence(SequenceView sequence) const {
  std::unordered_map<ActionId, std::size_t> query_counts;
  for (ActionId a : sequence) ++query_counts[a];

  // An entry is a candidate once every distinct action of its pattern has
  // been seen in the query.
  std::unordered_map<std::size_t, std::size_t> hits;
  for (const auto& [action, count] : query_counts) {
    auto it = action_index_.find(action);
    if (it == action_index_.end()) continue;
    for (std::size_t e : it->second) ++hits[e];
  }
  std::vector<std::size_t> matched;
  for (const auto& [e, n] : hits) {
    const ActionList& p = entries_[e].pattern.actions;
    std::unordered_map<ActionId, std::size_t> need;
    for (ActionId a : p) ++need[a];
    if (n != need.size()) continue;
    bool fits = std::all_of(need.begin(), need.end(),
                            [&](const auto& kv) { return query_counts[kv.first] >= kv.second; });
    if (fits && covers(p, sequence)) matched.push_back(e);
  }
  std::sort(matched.begin(), matched.end());
  std::vector<const KnowledgeEntry*> out;
  for (std::size_t e : matched) out.push_back(&entries_[e]);
  return out;
}

RetrievalSet KnowledgeBase::retrieve_similar(const Embedding& sequence_query,
                                             const Embedding* context_query,
                                             std::span<const KnowledgeEntry* const> scope,
                                             std::size_t k) const {
  if (sequence_query.dimension() != config_.dimension)
    throw Error(ErrorCode::DimensionMismatch,
                "query dimension " + std::to_string(sequence_query.dimension()) +
                    " does not match knowledge base dimension " +
                    std::to_string(config_.dimension));
  if (context_query && !context_query->empty() && context_query->dimension() != config_.dimension)
    throw Error(ErrorCode::DimensionMismatch, "context query dimension does not match");

  std::vector<std::size_t> benign_pool, malicious_pool;
  if (scope.empty()) {
    for (std::size_t i = 0; i < cases_.size(); ++i)
      (cases_[i].label == Label::Benign ? benign_pool : malicious_pool).push_back(i);
  } else {
    std::set<std::size_t> b, m;
    for (const KnowledgeEntry* e : scope) {
      for (const std::string& id : e->benign_case_ids) b.insert(case_index_.at(id));
      for (const std::string& id : e->malicious_case_ids) m.insert(case_index_.at(id));
    }
    benign_pool.assign(b.begin(), b.end());
    malicious_pool.assign(m.begin(), m.end());
  }

  RetrievalSet result;
  auto run_channel = [&](Channel channel, const Embedding& query) {
    std::vector<RetrievalHit> channel_hits;
    for (const auto* pool : {&benign_pool, &malicious_pool}) {
      std::vector<Scored> scored;
      for (std::size_t i : *pool) {
        const Embedding& e = channel == Channel::Sequence ? cases_[i].sequence_embedding
                                                          : cases_[i].context_embedding;
        if (e.empty()) continue;
        scored.push_back({cosine(query, e), i});
      }
      std::size_t take = std::min(k, scored.size());
      std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                        scored.end(), better);
      for (std::size_t j = 0; j < take; ++j)
        channel_hits.push_back(
            {scored[j].index, scored[j].similarity, channel, cases_[scored[j].index].label});
    }
    std::sort(channel_hits.begin(), channel_hits.end(), [](const auto& a, const auto& b) {
      return better({a.similarity, a.case_index}, {b.similarity, b.case_index});
    });
    result.hits.insert(result.hits.end(), channel_hits.begin(), channel_hits.end());
  };
  run_channel(Channel::Sequence, sequence_query);
  if (context_query && !context_query->empty()) run_channel(Channel::Context, *context_query);
  return result;
}

void KnowledgeBase::save(const std::filesystem::path& dir, const Taxonomy& taxonomy,
                         bool force) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec) && !force)
    throw Error(ErrorCode::AlreadyExists,
                "'" + dir.string() + "' already exists and is not empty (use --force)");
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());

  Json entries = Json::array();
  for (const KnowledgeEntry& e : entries_)
    entries.push_back({{"pattern", pattern_to_json(e.pattern, taxonomy)},
                       {"annotation", annotation_to_json(e.annotation)},
                       {"benign_case_ids", e.benign_case_ids},
                       {"malicious_case_ids", e.malicious_case_ids}});
  Json doc = {{"version", 1},
              {"config",
               {{"dimension", config_.dimension},
                {"embedder", config_.embedder},
                {"reasoner", config_.reasoner},
                {"k", config_.k},
                {"cases", cases_.size()}}},
              {"entries", std::move(entries)}};
  write_text_file(dir / "kb.json", dump_canonical(doc));

  std::string cases;
  for (const Case& c : cases_) {
    Json j = {{"id", c.id}, {"label", label_name(c.label)}, {"actions", taxonomy.names(c.actions)}};
    if (c.context) j["context"] = *c.context;
    cases += j.dump();
    cases += '\n';
  }
  write_text_file(dir / "cases.jsonl", cases);

  // Each row holds the sequence embedding then the context embedding (zeros
  // when the case has no context).
  std::string bin(kMagic, 4);
  put_u32(bin, kEmbeddingsVersion);
  put_u32(bin, static_cast<std::uint32_t>(config_.dimension));
  put_u64(bin, cases_.size());
  for (const Case& c : cases_) {
    put_row(bin, c.sequence_embedding, config_.dimension);
    put_row(bin, c.context_embedding, config_.dimension);
  }
  write_text_file(dir / "embeddings.bin", bin);
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& dir, const Taxonomy& taxonomy) {
  KnowledgeBase kb;
  Json doc;
  try {
    doc = Json::parse(read_text_file(dir / "kb.json"));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("kb.json is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("version", 0) != 1)
    throw Error(ErrorCode::Parse, "unsupported kb.json version");
  try {
    const Json& c = doc.at("config");
    kb.config_.dimension = c.at("dimension").get<std::size_t>();
    kb.config_.embedder = c.at("embedder").get<std::string>();
    kb.config_.reasoner = c.at("reasoner").get<std::string>();
    kb.config_.k = c.at("k").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed kb.json config: ") + e.what());
  }

  std::string cases_text = read_text_file(dir / "cases.jsonl");
  std::size_t pos = 0, line_no = 0;
  while (pos < cases_text.size()) {
    std::size_t nl = cases_text.find('\n', pos);
    std::string line = cases_text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? cases_text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      Json j = Json::parse(line);
      Case c;
      c.id = j.at("id").get<std::string>();
      c.label = parse_label(j.at("label").get<std::string>());
      c.actions = taxonomy.parse_actions(j.at("actions"));
      if (j.contains("context")) c.context = j["context"].get<std::string>();
      kb.cases_.push_back(std::move(c));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Parse, "cases.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::string bin = read_text_file(dir / "embeddings.bin");
  if (bin.size() < 20 || std::memcmp(bin.data(), kMagic, 4) != 0)
    throw Error(ErrorCode::Parse, "embeddings.bin has a bad header");
  if (get_u32(bin, 4) != kEmbeddingsVersion)
    throw Error(ErrorCode::Parse, "unsupported embeddings.bin version");
  std::size_t dim = get_u32(bin, 8);
  std::uint64_t rows = get_u64(bin, 12);
  if (dim != kb.config_.dimension)
    throw Error(ErrorCode::DimensionMismatch, "embeddings.bin dimension differs from kb.json");
  if (rows != kb.cases_.size())
    throw Error(ErrorCode::Validation, "embeddings.bin row count differs from cases.jsonl");
  if (bin.size() != 20 + rows * dim * 8)
    throw Error(ErrorCode::Parse, "embeddings.bin is truncated");
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t at = 20 + r * dim * 8;
    kb.cases_[r].sequence_embedding = get_row(bin, at, dim);
    kb.cases_[r].context_embedding = get_row(bin, at + dim * 4, dim);
    if (kb.cases_[r].sequence_embedding.empty())
      throw Error(ErrorCode::Validation, "case '" + kb.cases_[r].id + "' has no sequence embedding");
  }
  for (std::size_t i = 0; i < kb.cases_.size(); ++i)
    if (!kb.case_index_.emplace(kb.cases_[i].id, i).second)
      throw Error(ErrorCode::Validation, "duplicate case id '" + kb.cases_[i].id + "'");

  try {
    for (const Json& e : doc.at("entries")) {
      KnowledgeEntry entry;
      entry.pattern = pattern_from_json(e.at("pattern"), taxonomy);
      entry.annotation = annotation_from_json(e.at("annotation"));
      entry.benign_case_ids = e.at("benign_case_ids").get<std::vector<std::string>>();
      entry.malicious_case_ids = e.at("malicious_case_ids").get<std::vector<std::string>>();
      kb.entries_.push_back(std::move(entry));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed kb.json entry: ") + e.what());
  }
  std::sort(kb.entries_.begin(), kb.entries_.end(),
            [](const KnowledgeEntry& a, const KnowledgeEntry& b) { return a.pattern.id < b.pattern.id; });
  kb.validate();
  kb.build_indexes();
  return kb;
}

}  // namespace seqguard
