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

#include "corpus.hpp"

namespace seqguard {

namespace {

void validate_source(const SourceRef& src) {
  if (src.line_start < 1 || src.line_start > src.line_end)
    throw Error(ErrorCode::Validation, "source line range is invalid");
  if (src.file.empty() || src.file.front() == '/' || src.file.find(":\\") != std::string::npos)
    throw Error(ErrorCode::Validation, "source file must be a relative path");
}

}  // namespace

Json sequence_to_json(const ActionSequence& seq, const Taxonomy& taxonomy) {
  Json obj = {{"id", seq.id},
              {"label", label_name(seq.label)},
              {"actions", taxonomy.names(seq.actions)}};
  if (seq.context) obj["context"] = *seq.context;
  if (seq.source) {
    obj["source"] = {{"package", seq.source->package},
                     {"version", seq.source->version},
                     {"file", seq.source->file},
                     {"line_start", seq.source->line_start},
                     {"line_end", seq.source->line_end}};
  }
  return obj;
}

ActionSequence sequence_from_json(const Json& obj, const Taxonomy& taxonomy) {
  if (!obj.is_object()) throw Error(ErrorCode::Parse, "expected a JSON object");
  ActionSequence seq;
  try {
    seq.id = obj.at("id").get<std::string>();
    seq.label = parse_label(obj.at("label").get<std::string>());
    seq.actions = taxonomy.parse_actions(obj.at("actions"));
    if (obj.contains("context") && !obj["context"].is_null())
      seq.context = obj["context"].get<std::string>();
    if (obj.contains("source") && !obj["source"].is_null()) {
      const Json& s = obj["source"];
      SourceRef src;
      src.package = s.at("package").get<std::string>();
      src.version = s.value("version", std::string());
      src.file = s.at("file").get<std::string>();
      src.line_start = s.at("line_start").get<std::size_t>();
      src.line_end = s.at("line_end").get<std::size_t>();
      seq.source = std::move(src);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed sequence: ") + e.what());
  }
  if (seq.id.empty()) throw Error(ErrorCode::Validation, "empty sequence id");
  if (seq.actions.empty())
    throw Error(ErrorCode::Validation, "sequence '" + seq.id + "' has no actions");
  if (seq.source) validate_source(*seq.source);
  return seq;
}

Corpus Corpus::load(std::string_view jsonl, const Taxonomy& taxonomy) {
  std::vector<ActionSequence> sequences;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    std::string_view line = jsonl.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? jsonl.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto fail = [&](ErrorCode code, const std::string& what) {
      return Error(code, "corpus line " + std::to_string(line_no) + ": " + what);
    };
    try {
      ActionSequence seq = sequence_from_json(Json::parse(line), taxonomy);
      if (auto [it, inserted] = seen.emplace(seq.id, line_no); !inserted)
        throw fail(ErrorCode::Validation, "duplicate id '" + seq.id + "' (first on line " +
                                              std::to_string(it->second) + ")");
      sequences.push_back(std::move(seq));
    } catch (const Json::parse_error& e) {
      throw fail(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
    } catch (const Error& e) {
      if (std::string_view(e.what()).starts_with("corpus line")) throw;
      throw fail(e.code(), e.what());
    }
  }
  return from_sequences(std::move(sequences));
}

Corpus Corpus::load_file(const std::string& path, const Taxonomy& taxonomy) {
  return load(read_text_file(path), taxonomy);
}

Corpus Corpus::from_sequences(std::vector<ActionSequence> sequences) {
  Corpus c;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const ActionSequence& s = sequences[i];
    if (s.id.empty()) throw Error(ErrorCode::Validation, "empty sequence id");
    if (s.actions.empty())
      throw Error(ErrorCode::Validation, "sequence '" + s.id + "' has no actions");
    if (s.source) validate_source(*s.source);
    if (!c.by_id_.emplace(s.id, i).second)
      throw Error(ErrorCode::Validation, "duplicate id '" + s.id + "'");
  }
  c.sequences_ = std::move(sequences);
  return c;
}

std::string Corpus::serialize(const Taxonomy& taxonomy) const {
  std::string out;
  for (const ActionSequence& s : sequences_) {
    out += sequence_to_json(s, taxonomy).dump();
    out += '\n';
  }
  return out;
}

const ActionSequence* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &sequences_[it->second];
}

std::size_t Corpus::count(Label label) const {
  std::size_t n = 0;
  for (const ActionSequence& s : sequences_) n += s.label == label;
  return n;
}

SplitCorpus split_by_label(const Corpus& corpus) {
  SplitCorpus split;
  for (const ActionSequence& s : corpus.sequences()) {
    switch (s.label) {
      case Label::Benign: split.benign.push_back(s); break;
      case Label::Malicious: split.malicious.push_back(s); break;
      case Label::Unknown:
        throw Error(ErrorCode::Validation,
                    "sequence '" + s.id + "' is unlabelled; training corpora need benign/malicious");
    }
  }
  return split;
}

}  // namespace seqguard
