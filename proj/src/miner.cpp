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

#include "miner.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace seqguard {

std::string_view pattern_kind_name(PatternKind kind) {
  switch (kind) {
    case PatternKind::DeterministicBenign: return "deterministic_benign";
    case PatternKind::DeterministicMalicious: return "deterministic_malicious";
    case PatternKind::Justifiable: return "justifiable";
  }
  return "justifiable";
}

PatternKind parse_pattern_kind(std::string_view text) {
  if (text == "deterministic_benign") return PatternKind::DeterministicBenign;
  if (text == "deterministic_malicious") return PatternKind::DeterministicMalicious;
  if (text == "justifiable") return PatternKind::Justifiable;
  throw Error(ErrorCode::Parse, "unknown pattern kind '" + std::string(text) + "'");
}

void MiningConfig::validate() const {
  if (supports.empty()) throw Error(ErrorCode::InvalidArgument, "support list is empty");
  for (std::size_t i = 0; i < supports.size(); ++i) {
    if (supports[i] == 0)
      throw Error(ErrorCode::InvalidArgument, "support thresholds must be positive");
    if (i > 0 && supports[i] >= supports[i - 1])
      throw Error(ErrorCode::InvalidArgument, "support thresholds must be strictly decreasing");
  }
  if (!(tau > 0.5 && tau <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "tau must lie in (0.5, 1]");
  if (min_pattern_len < 1)
    throw Error(ErrorCode::InvalidArgument, "min_pattern_len must be at least 1");
}

bool covers(SequenceView pattern, SequenceView sequence) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < sequence.size() && j < pattern.size(); ++i)
    if (sequence[i] == pattern[j]) ++j;
  return j == pattern.size();
}

namespace {

struct Projection {
  std::uint32_t seq;
  std::uint32_t pos;  // first suffix index not yet consumed
};

class PrefixSpanner {
 public:
  PrefixSpanner(std::span<const SequenceView> db, std::size_t min_support, std::size_t min_len)
      : db_(db), min_support_(min_support), min_len_(min_len) {
    std::uint32_t max_id = 0;
    for (SequenceView s : db_)
      for (ActionId a : s) max_id = std::max(max_id, a.value);
    counts_.resize(std::size_t{max_id} + 1);
  }

  std::vector<FrequentPattern> run() {
    std::vector<Projection> root;
    root.reserve(db_.size());
    for (std::uint32_t i = 0; i < db_.size(); ++i) root.push_back({i, 0});
    grow(root);
    return std::move(out_);
  }

 private:
  void grow(const std::vector<Projection>& projected) {
    // Distinct-sequence support of each item in the projected suffixes.
    std::vector<std::uint32_t> last_seq(counts_.size(), UINT32_MAX);
    std::fill(counts_.begin(), counts_.end(), 0);
    for (const Projection& p : projected) {
      SequenceView s = db_[p.seq];
      for (std::size_t i = p.pos; i < s.size(); ++i) {
        std::uint32_t item = s[i].value;
        if (last_seq[item] != p.seq) {
          last_seq[item] = p.seq;
          ++counts_[item];
        }
      }
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> frequent;
    for (std::uint32_t item = 0; item < counts_.size(); ++item)
      if (counts_[item] >= min_support_) frequent.emplace_back(item, counts_[item]);

    for (auto [item, count] : frequent) {
      std::vector<Projection> next;
      next.reserve(count);
      for (const Projection& p : projected) {
        SequenceView s = db_[p.seq];
        for (std::size_t i = p.pos; i < s.size(); ++i) {
          if (s[i].value == item) {
            next.push_back({p.seq, static_cast<std::uint32_t>(i + 1)});
            break;
          }
        }
      }
      prefix_.push_back(ActionId{item});
      if (prefix_.size() >= min_len_) {
        FrequentPattern fp;
        fp.actions = prefix_;
        fp.support = next.size();
        fp.sequences.reserve(next.size());
        for (const Projection& p : next) fp.sequences.push_back(p.seq);
        out_.push_back(std::move(fp));
      }
      grow(next);
      prefix_.pop_back();
    }
  }

  std::span<const SequenceView> db_;
  std::size_t min_support_;
  std::size_t min_len_;
  std::vector<std::uint32_t> counts_;
  ActionList prefix_;
  std::vector<FrequentPattern> out_;
};

std::vector<SequenceView> views_of(std::span<const ActionSequence> a,
                                   std::span<const ActionSequence> b = {}) {
  std::vector<SequenceView> views;
  views.reserve(a.size() + b.size());
  for (const ActionSequence& s : a) views.emplace_back(s.actions);
  for (const ActionSequence& s : b) views.emplace_back(s.actions);
  return views;
}

// Sets covered_ids and bias_ratio_full against the full corpus.
void measure_full(Pattern& p, std::span<const ActionSequence> full_benign,
                  std::span<const ActionSequence> full_malicious) {
  std::size_t fb = 0, fm = 0;
  p.covered_ids.clear();
  for (const ActionSequence& s : full_benign)
    if (covers(p.actions, s.actions)) {
      p.covered_ids.push_back(s.id);
      ++fb;
    }
  for (const ActionSequence& s : full_malicious)
    if (covers(p.actions, s.actions)) {
      p.covered_ids.push_back(s.id);
      ++fm;
    }
  std::size_t total = fb + fm;
  std::size_t own = p.bias_class == Label::Benign ? fb : fm;
  p.bias_ratio_full = total == 0 ? 0.0 : static_cast<double>(own) / static_cast<double>(total);
}

}  // namespace

std::vector<FrequentPattern> prefixspan(std::span<const SequenceView> sequences,
                                        std::size_t min_support, std::size_t min_len) {
  if (min_support < 1 || min_len < 1)
    throw Error(ErrorCode::InvalidArgument, "min_support and min_len must be >= 1");
  if (sequences.empty()) return {};
  return PrefixSpanner(sequences, min_support, min_len).run();
}

std::vector<FrequentPattern> prefixspan(std::span<const ActionSequence> sequences,
                                        std::size_t min_support, std::size_t min_len) {
  std::vector<SequenceView> views = views_of(sequences);
  return prefixspan(std::span<const SequenceView>(views), min_support, min_len);
}

BiasRatio max_coverage_ratio(SequenceView pattern, std::span<const ActionSequence> benign,
                             std::span<const ActionSequence> malicious) {
  BiasRatio r;
  for (const ActionSequence& s : benign) r.covered_benign += covers(pattern, s.actions);
  for (const ActionSequence& s : malicious) r.covered_malicious += covers(pattern, s.actions);
  std::size_t total = r.covered_benign + r.covered_malicious;
  if (total == 0)
    throw Error(ErrorCode::InvalidArgument, "pattern covers no sequence; ratio undefined");
  r.dominant = r.covered_malicious >= r.covered_benign ? Label::Malicious : Label::Benign;
  std::size_t top = std::max(r.covered_benign, r.covered_malicious);
  r.ratio = static_cast<double>(top) / static_cast<double>(total);
  return r;
}

std::string pattern_id(SequenceView actions, const Taxonomy& taxonomy) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i > 0) h = fnv1a64("\x1f", h);
    h = fnv1a64(taxonomy.name(actions[i]), h);
  }
  return "p" + hex64(h);
}

DeterministicResult mine_deterministic(std::span<const ActionSequence> benign,
                                       std::span<const ActionSequence> malicious,
                                       const MiningConfig& config, const Taxonomy& taxonomy) {
  config.validate();
  DeterministicResult result;
  result.residual_benign.assign(benign.begin(), benign.end());
  result.residual_malicious.assign(malicious.begin(), malicious.end());
  std::set<ActionList> known;

  for (std::size_t s : config.supports) {
    auto& rb = result.residual_benign;
    auto& rm = result.residual_malicious;
    if (rb.empty() && rm.empty()) break;
    std::vector<SequenceView> db = views_of(rb, rm);
    const std::size_t n_benign = rb.size();
    std::vector<char> covered(db.size(), 0);

    for (FrequentPattern& fp : prefixspan(std::span<const SequenceView>(db), s,
                                          config.min_pattern_len)) {
      std::size_t cb = 0;
      for (std::uint32_t i : fp.sequences) cb += i < n_benign;
      std::size_t cm = fp.sequences.size() - cb;
      if (cb > 0 && cm > 0) continue;
      if (!known.insert(fp.actions).second) continue;
      Pattern p;
      p.actions = std::move(fp.actions);
      p.id = pattern_id(p.actions, taxonomy);
      p.kind = cm == 0 ? PatternKind::DeterministicBenign : PatternKind::DeterministicMalicious;
      p.bias_class = cm == 0 ? Label::Benign : Label::Malicious;
      p.bias_ratio_residual = 1.0;
      p.support = fp.support;
      p.discovered_at_support = s;
      for (std::uint32_t i : fp.sequences) covered[i] = 1;
      result.patterns.push_back(std::move(p));
    }

    std::vector<ActionSequence> next_b, next_m;
    for (std::size_t i = 0; i < db.size(); ++i) {
      if (covered[i]) continue;
      if (i < n_benign)
        next_b.push_back(std::move(rb[i]));
      else
        next_m.push_back(std::move(rm[i - n_benign]));
    }
    rb = std::move(next_b);
    rm = std::move(next_m);
  }

  for (Pattern& p : result.patterns) measure_full(p, benign, malicious);
  return result;
}

std::vector<Pattern> mine_justifiable(std::span<const ActionSequence> residual_benign,
                                      std::span<const ActionSequence> residual_malicious,
                                      const MiningConfig& config, const Taxonomy& taxonomy,
                                      std::span<const ActionSequence> full_benign,
                                      std::span<const ActionSequence> full_malicious) {
  config.validate();
  std::vector<Pattern> out;
  if (residual_benign.empty() && residual_malicious.empty()) return out;
  std::vector<SequenceView> db = views_of(residual_benign, residual_malicious);
  const std::size_t n_benign = residual_benign.size();
  std::set<ActionList> known;
  // Guards the ratio comparison against representation error, e.g. 9/10 vs 0.9.
  constexpr double kRatioSlack = 1e-12;

  for (std::size_t s : config.supports) {
    for (FrequentPattern& fp : prefixspan(std::span<const SequenceView>(db), s,
                                          config.min_pattern_len)) {
      if (known.contains(fp.actions)) continue;
      std::size_t cb = 0;
      for (std::uint32_t i : fp.sequences) cb += i < n_benign;
      std::size_t cm = fp.sequences.size() - cb;
      std::size_t top = std::max(cb, cm);
      double ratio = static_cast<double>(top) / static_cast<double>(cb + cm);
      if (ratio + kRatioSlack < config.tau) continue;
      known.insert(fp.actions);
      Pattern p;
      p.actions = std::move(fp.actions);
      p.id = pattern_id(p.actions, taxonomy);
      p.kind = PatternKind::Justifiable;
      p.bias_class = cm >= cb ? Label::Malicious : Label::Benign;
      p.bias_ratio_residual = ratio;
      p.support = fp.support;
      p.discovered_at_support = s;
      out.push_back(std::move(p));
    }
  }
  for (Pattern& p : out) measure_full(p, full_benign, full_malicious);
  return out;
}

std::vector<Pattern> mine_justifiable(std::span<const ActionSequence> residual_benign,
                                      std::span<const ActionSequence> residual_malicious,
                                      const MiningConfig& config, const Taxonomy& taxonomy) {
  return mine_justifiable(residual_benign, residual_malicious, config, taxonomy,
                          residual_benign, residual_malicious);
}

namespace {

class Bitset {
 public:
  explicit Bitset(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  std::size_t count_new(const Bitset& covered) const {
    std::size_t n = 0;
    for (std::size_t w = 0; w < words_.size(); ++w)
      n += static_cast<std::size_t>(__builtin_popcountll(words_[w] & ~covered.words_[w]));
    return n;
  }
  void merge(const Bitset& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  }

 private:
  std::vector<std::uint64_t> words_;
};

// Strict ordering used to break equal-gain ties.
bool preferred(const Pattern& a, const Pattern& b) {
  bool da = is_deterministic(a.kind), db = is_deterministic(b.kind);
  if (da != db) return da;
  if (a.actions.size() != b.actions.size()) return a.actions.size() < b.actions.size();
  if (a.actions != b.actions) return a.actions < b.actions;
  return a.id < b.id;
}

}  // namespace

std::vector<Pattern> merge_patterns(std::span<const Pattern> candidates,
                                    std::span<const ActionSequence> full_benign,
                                    std::span<const ActionSequence> full_malicious) {
  std::unordered_map<std::string, std::size_t> index;
  std::size_t n = 0;
  for (const ActionSequence& s : full_benign) index.emplace(s.id, n++);
  for (const ActionSequence& s : full_malicious) index.emplace(s.id, n++);

  std::vector<Bitset> cover(candidates.size(), Bitset(n));
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (const std::string& id : candidates[c].covered_ids) {
      auto it = index.find(id);
      if (it == index.end())
        throw Error(ErrorCode::Internal,
                    "pattern " + candidates[c].id + " covers unknown sequence '" + id + "'");
      cover[c].set(it->second);
    }
  }

  std::vector<Pattern> selected;
  std::vector<char> used(candidates.size(), 0);
  Bitset covered(n);
  std::size_t covered_count = 0;
  while (covered_count < n) {
    std::size_t best = candidates.size();
    std::size_t best_gain = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      std::size_t gain = cover[c].count_new(covered);
      if (gain == 0) continue;
      if (gain > best_gain ||
          (gain == best_gain && preferred(candidates[c], candidates[best]))) {
        best = c;
        best_gain = gain;
      }
    }
    if (best_gain == 0) break;
    used[best] = 1;
    covered.merge(cover[best]);
    covered_count += best_gain;
    selected.push_back(candidates[best]);
  }
  return selected;
}

MiningResult hierarchical_mine(const Corpus& corpus, const MiningConfig& config,
                               const Taxonomy& taxonomy) {
  config.validate();
  SplitCorpus split = split_by_label(corpus);
  MiningResult result;
  result.config = config;

  DeterministicResult det = mine_deterministic(split.benign, split.malicious, config, taxonomy);
  result.justifiable = mine_justifiable(det.residual_benign, det.residual_malicious, config,
                                        taxonomy, split.benign, split.malicious);
  result.deterministic = std::move(det.patterns);
  for (const ActionSequence& s : det.residual_benign) result.residual_benign_ids.push_back(s.id);
  for (const ActionSequence& s : det.residual_malicious)
    result.residual_malicious_ids.push_back(s.id);

  std::vector<Pattern> candidates = result.deterministic;
  candidates.insert(candidates.end(), result.justifiable.begin(), result.justifiable.end());
  result.optimized = merge_patterns(candidates, split.benign, split.malicious);

  std::set<std::string> covered;
  for (const Pattern& p : result.optimized)
    covered.insert(p.covered_ids.begin(), p.covered_ids.end());
  std::size_t cb = 0, cm = 0;
  for (const ActionSequence& s : split.benign) cb += covered.contains(s.id);
  for (const ActionSequence& s : split.malicious) cm += covered.contains(s.id);

  MiningStats& st = result.stats;
  st.n_benign = split.benign.size();
  st.n_malicious = split.malicious.size();
  st.n_det = result.deterministic.size();
  st.n_just = result.justifiable.size();
  st.n_opt = result.optimized.size();
  auto frac = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  st.coverage_benign = frac(cb, st.n_benign);
  st.coverage_malicious = frac(cm, st.n_malicious);
  st.coverage_total = frac(cb + cm, st.n_benign + st.n_malicious);
  return result;
}

Json pattern_to_json(const Pattern& p, const Taxonomy& taxonomy) {
  return {{"id", p.id},
          {"actions", taxonomy.names(p.actions)},
          {"kind", pattern_kind_name(p.kind)},
          {"bias_class", label_name(p.bias_class)},
          {"bias_ratio_residual", p.bias_ratio_residual},
          {"bias_ratio_full", p.bias_ratio_full},
          {"support", p.support},
          {"discovered_at_support", p.discovered_at_support},
          {"covered_ids", p.covered_ids}};
}

Pattern pattern_from_json(const Json& obj, const Taxonomy& taxonomy) {
  Pattern p;
  try {
    p.actions = taxonomy.parse_actions(obj.at("actions"));
    p.id = obj.at("id").get<std::string>();
    p.kind = parse_pattern_kind(obj.at("kind").get<std::string>());
    p.bias_class = parse_label(obj.at("bias_class").get<std::string>());
    p.bias_ratio_residual = obj.at("bias_ratio_residual").get<double>();
    p.bias_ratio_full = obj.at("bias_ratio_full").get<double>();
    p.support = obj.at("support").get<std::size_t>();
    p.discovered_at_support = obj.at("discovered_at_support").get<std::size_t>();
    p.covered_ids = obj.at("covered_ids").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed pattern: ") + e.what());
  }
  if (p.bias_class == Label::Unknown)
    throw Error(ErrorCode::Validation, "pattern " + p.id + " has no bias class");
  if (p.id != pattern_id(p.actions, taxonomy))
    throw Error(ErrorCode::Validation, "pattern id " + p.id + " does not match its actions");
  if (p.covered_ids.empty())
    throw Error(ErrorCode::Validation, "pattern " + p.id + " covers no sequence");
  if (p.support < p.discovered_at_support)
    throw Error(ErrorCode::Validation, "pattern " + p.id + " support below its discovery level");
  if (is_deterministic(p.kind) && p.bias_ratio_residual != 1.0)
    throw Error(ErrorCode::Validation, "deterministic pattern " + p.id + " is not pure");
  return p;
}

PatternFile to_pattern_file(const MiningResult& result) {
  PatternFile file;
  file.config = result.config;
  file.patterns = result.optimized;
  std::sort(file.patterns.begin(), file.patterns.end(),
            [](const Pattern& a, const Pattern& b) { return a.id < b.id; });
  file.stats = result.stats;
  return file;
}

std::string serialize_pattern_file(const PatternFile& file, const Taxonomy& taxonomy) {
  Json patterns = Json::array();
  for (const Pattern& p : file.patterns) patterns.push_back(pattern_to_json(p, taxonomy));
  const MiningStats& st = file.stats;
  Json doc = {{"version", 1},
              {"config",
               {{"supports", file.config.supports},
                {"tau", file.config.tau},
                {"min_pattern_len", file.config.min_pattern_len}}},
              {"patterns", std::move(patterns)},
              {"stats",
               {{"coverage_benign", st.coverage_benign},
                {"coverage_malicious", st.coverage_malicious},
                {"coverage_total", st.coverage_total},
                {"n_benign", st.n_benign},
                {"n_malicious", st.n_malicious},
                {"n_det", st.n_det},
                {"n_just", st.n_just},
                {"n_opt", st.n_opt}}}};
  return dump_canonical(doc);
}

PatternFile parse_pattern_file(std::string_view text, const Taxonomy& taxonomy) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("pattern file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("version", 0) != 1)
    throw Error(ErrorCode::Parse, "unsupported pattern file version");
  PatternFile file;
  try {
    const Json& c = doc.at("config");
    file.config.supports = c.at("supports").get<std::vector<std::size_t>>();
    file.config.tau = c.at("tau").get<double>();
    file.config.min_pattern_len = c.at("min_pattern_len").get<std::size_t>();
    const Json& s = doc.at("stats");
    file.stats.coverage_benign = s.at("coverage_benign").get<double>();
    file.stats.coverage_malicious = s.at("coverage_malicious").get<double>();
    file.stats.coverage_total = s.at("coverage_total").get<double>();
    file.stats.n_benign = s.value("n_benign", std::size_t{0});
    file.stats.n_malicious = s.value("n_malicious", std::size_t{0});
    file.stats.n_det = s.at("n_det").get<std::size_t>();
    file.stats.n_just = s.at("n_just").get<std::size_t>();
    file.stats.n_opt = s.value("n_opt", std::size_t{0});
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed pattern file: ") + e.what());
  }
  file.config.validate();
  std::set<std::string> ids;
  for (const Json& p : doc.at("patterns")) {
    file.patterns.push_back(pattern_from_json(p, taxonomy));
    if (!ids.insert(file.patterns.back().id).second)
      throw Error(ErrorCode::Validation, "duplicate pattern " + file.patterns.back().id);
  }
  std::sort(file.patterns.begin(), file.patterns.end(),
            [](const Pattern& a, const Pattern& b) { return a.id < b.id; });
  return file;
}

}  // namespace seqguard
