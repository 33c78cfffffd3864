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

#include "taxonomy.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace seqguard {

namespace {

constexpr std::array<std::string_view, 12> kCategories = {
    "File Operations",     "Basic Network Ops",     "Network File Transfer",
    "Command & Control",   "Third-party Platform Abuse", "Data Exfiltration",
    "Code Execution",      "Info Gathering",        "Encryption/Hashing",
    "System Operations",   "Data Transformation",   "Persistence/Stealth",
};

constexpr std::string_view kOtherPrefix = "other: ";

std::size_t word_count(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

std::string strip_spaces(std::string_view text) {
  std::string out;
  for (char c : text)
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out.push_back(c);
  return out;
}

Error entry_error(std::size_t index, const std::string& what) {
  return Error(ErrorCode::Validation,
               "taxonomy entry " + std::to_string(index) + ": " + what);
}

void validate_trigger(const TriggerSignature& t, std::size_t index) {
  const std::string& path = t.module_path;
  if (path.empty()) throw entry_error(index, "empty trigger module_path");
  std::size_t start = 0;
  std::size_t segments = 0;
  while (true) {
    std::size_t dot = path.find('.', start);
    std::string_view seg(path.data() + start,
                         (dot == std::string::npos ? path.size() : dot) - start);
    bool last = dot == std::string::npos;
    if (seg.empty())
      throw entry_error(index, "malformed trigger '" + path + "': empty segment");
    if (seg.find('*') != std::string_view::npos && (seg != "*" || !last))
      throw entry_error(index, "malformed trigger '" + path +
                                   "': wildcard allowed only as the whole last segment");
    ++segments;
    if (last) break;
    start = dot + 1;
  }
  if (segments == 1 && path == "*")
    throw entry_error(index, "malformed trigger '*': needs a module prefix");
  if (t.last_arg && t.last_arg->empty())
    throw entry_error(index, "malformed trigger '" + path + "': empty last_arg");
}

}  // namespace

bool TriggerSignature::wildcard() const {
  return module_path.size() >= 2 &&
         module_path.compare(module_path.size() - 2, 2, ".*") == 0;
}

std::span<const std::string_view> builtin_categories() { return kCategories; }

bool is_valid_action_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

bool is_valid_category(std::string_view category) {
  if (std::find(kCategories.begin(), kCategories.end(), category) != kCategories.end())
    return true;
  return category.size() > kOtherPrefix.size() && category.starts_with(kOtherPrefix);
}

Taxonomy Taxonomy::load(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("taxonomy is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
    throw Error(ErrorCode::Parse, "taxonomy must be an object with an 'entries' array");
  if (doc.value("version", 0) != 1)
    throw Error(ErrorCode::Parse, "unsupported taxonomy version");

  std::vector<TaxonomyEntry> entries;
  std::size_t index = 0;
  for (const Json& e : doc["entries"]) {
    try {
      TaxonomyEntry entry;
      entry.action = e.at("action").get<std::string>();
      entry.category = e.at("category").get<std::string>();
      entry.description = e.value("description", std::string());
      for (const Json& t : e.value("triggers", Json::array())) {
        TriggerSignature sig;
        sig.module_path = t.at("module_path").get<std::string>();
        sig.call_only = t.value("call_only", true);
        if (t.contains("last_arg")) sig.last_arg = t["last_arg"].get<std::string>();
        entry.triggers.push_back(std::move(sig));
      }
      entries.push_back(std::move(entry));
    } catch (const Json::exception& ex) {
      throw entry_error(index, std::string("malformed entry: ") + ex.what());
    }
    ++index;
  }
  return from_entries(std::move(entries));
}

Taxonomy Taxonomy::from_entries(std::vector<TaxonomyEntry> entries) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const TaxonomyEntry& e = entries[i];
    if (!is_valid_action_name(e.action))
      throw entry_error(i, "action '" + e.action + "' is not lowercase snake_case");
    if (auto [it, inserted] = seen.emplace(e.action, i); !inserted)
      throw entry_error(i, "duplicate action '" + e.action + "' (first at entry " +
                               std::to_string(it->second) + ")");
    if (!is_valid_category(e.category))
      throw entry_error(i, "unknown category '" + e.category + "'");
    if (word_count(e.description) > 20)
      throw entry_error(i, "description of '" + e.action + "' exceeds 20 words");
    for (const TriggerSignature& t : e.triggers) validate_trigger(t, i);
  }
  std::sort(entries.begin(), entries.end(),
            [](const TaxonomyEntry& a, const TaxonomyEntry& b) { return a.action < b.action; });
  for (TaxonomyEntry& e : entries)
    for (TriggerSignature& t : e.triggers)
      if (t.last_arg) t.last_arg = strip_spaces(*t.last_arg);

  Taxonomy tax;
  tax.entries_ = std::move(entries);
  tax.build_index();
  return tax;
}

void Taxonomy::build_index() {
  by_name_.clear();
  exact_.clear();
  wildcard_.clear();
  for (std::uint32_t i = 0; i < entries_.size(); ++i) {
    by_name_.emplace(entries_[i].action, i);
    const auto& triggers = entries_[i].triggers;
    for (std::size_t t = 0; t < triggers.size(); ++t) {
      const std::string& path = triggers[t].module_path;
      if (triggers[t].wildcard())
        wildcard_[path.substr(0, path.size() - 2)].push_back({ActionId{i}, t});
      else
        exact_[path].push_back({ActionId{i}, t});
    }
  }
}

std::optional<ActionId> Taxonomy::find(std::string_view action) const {
  auto it = by_name_.find(std::string(action));
  if (it == by_name_.end()) return std::nullopt;
  return ActionId{it->second};
}

ActionId Taxonomy::require(std::string_view action) const {
  if (auto id = find(action)) return *id;
  throw Error(ErrorCode::Validation, "unknown action '" + std::string(action) + "'");
}

std::vector<std::string> Taxonomy::names(std::span<const ActionId> actions) const {
  std::vector<std::string> out;
  out.reserve(actions.size());
  for (ActionId a : actions) out.push_back(name(a));
  return out;
}

ActionList Taxonomy::parse_actions(const Json& names) const {
  if (!names.is_array()) throw Error(ErrorCode::Parse, "actions must be an array");
  ActionList out;
  out.reserve(names.size());
  for (const Json& n : names) {
    if (!n.is_string()) throw Error(ErrorCode::Parse, "action names must be strings");
    out.push_back(require(n.get_ref<const std::string&>()));
  }
  return out;
}

void Taxonomy::collect(const std::vector<TriggerRef>& refs, const SiteShape* shape,
                       std::vector<ActionId>& out) const {
  for (const TriggerRef& ref : refs) {
    const TriggerSignature& t = entries_[ref.action.value].triggers[ref.trigger];
    if (shape) {
      if (t.call_only && !shape->is_call) continue;
      if (t.last_arg && (!shape->is_call || shape->last_arg != t.last_arg)) continue;
    }
    out.push_back(ref.action);
  }
}

std::vector<ActionId> Taxonomy::lookup(std::string_view resolved_api,
                                       const SiteShape* shape) const {
  std::vector<ActionId> out;
  std::string api(resolved_api);
  if (auto it = exact_.find(api); it != exact_.end()) collect(it->second, shape, out);
  // "a.b.*" matches any name with at least one segment after "a.b".
  for (std::size_t dot = api.rfind('.'); dot != std::string::npos && dot > 0;
       dot = api.rfind('.', dot - 1)) {
    if (auto it = wildcard_.find(api.substr(0, dot)); it != wildcard_.end())
      collect(it->second, shape, out);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ActionId> Taxonomy::lookup_site(std::string_view resolved_api,
                                            const SiteShape& shape) const {
  return lookup(resolved_api, &shape);
}

std::vector<ActionId> Taxonomy::lookup_trigger(std::string_view resolved_api) const {
  return lookup(resolved_api, nullptr);
}

Json Taxonomy::to_json() const {
  Json entries = Json::array();
  for (const TaxonomyEntry& e : entries_) {
    Json triggers = Json::array();
    for (const TriggerSignature& t : e.triggers) {
      Json jt = {{"module_path", t.module_path}, {"call_only", t.call_only}};
      if (t.last_arg) jt["last_arg"] = *t.last_arg;
      triggers.push_back(std::move(jt));
    }
    entries.push_back({{"action", e.action},
                       {"category", e.category},
                       {"description", e.description},
                       {"triggers", std::move(triggers)}});
  }
  return {{"version", 1}, {"entries", std::move(entries)}};
}

std::string Taxonomy::serialize() const { return dump_canonical(to_json()); }

const Taxonomy& Taxonomy::seed() {
  static const Taxonomy instance = load(seed_json());
  return instance;
}

}  // namespace seqguard
