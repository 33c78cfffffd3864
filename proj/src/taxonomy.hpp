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

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace seqguard {

/// Interned action token. The value indexes the owning taxonomy, whose
/// entries are kept sorted by action name, so comparing ids compares names.
struct ActionId {
  std::uint32_t value = 0;
  auto operator<=>(const ActionId&) const = default;
};

using ActionList = std::vector<ActionId>;

struct TriggerSignature {
  std::string module_path;
  bool call_only = true;
  // When set, a call site matches only if its final positional argument,
  // with whitespace removed, equals this text. Distinguishes os.dup2(fd, 0)
  // from os.dup2(fd, 1).
  std::optional<std::string> last_arg;

  bool wildcard() const;
  bool operator==(const TriggerSignature&) const = default;
};

struct TaxonomyEntry {
  std::string action;
  std::string category;
  std::string description;
  std::vector<TriggerSignature> triggers;

  bool operator==(const TaxonomyEntry&) const = default;
};

/// Shape of a located API reference, used to filter call-only and
/// argument-qualified triggers.
struct SiteShape {
  bool is_call = true;
  std::optional<std::string> last_arg;  // whitespace-free
};

bool is_valid_action_name(std::string_view name);
bool is_valid_category(std::string_view category);
std::span<const std::string_view> builtin_categories();

class Taxonomy {
 public:
  Taxonomy() = default;

  /// Parses and validates a taxonomy document. Errors name the entry index.
  static Taxonomy load(std::string_view json_text);
  static Taxonomy from_entries(std::vector<TaxonomyEntry> entries);
  /// The shipped seed vocabulary, compiled into the library.
  static const Taxonomy& seed();
  static std::string_view seed_json();

  std::size_t size() const { return entries_.size(); }
  const std::vector<TaxonomyEntry>& entries() const { return entries_; }

  std::optional<ActionId> find(std::string_view action) const;
  // Throws Error(Validation) naming the action.
  ActionId require(std::string_view action) const;
  const std::string& name(ActionId id) const { return entries_.at(id.value).action; }
  const TaxonomyEntry& entry(ActionId id) const { return entries_.at(id.value); }

  std::vector<std::string> names(std::span<const ActionId> actions) const;
  ActionList parse_actions(const Json& names) const;

  /// All actions with a trigger matching `resolved_api`, treating the
  /// reference as a call with unknown arguments. Sorted by action name.
  std::vector<ActionId> lookup_trigger(std::string_view resolved_api) const;
  /// Like lookup_trigger but honours call_only and last_arg qualifiers.
  std::vector<ActionId> lookup_site(std::string_view resolved_api,
                                    const SiteShape& shape) const;

  /// Canonical JSON (entries sorted by action, keys sorted).
  std::string serialize() const;
  Json to_json() const;

 private:
  struct TriggerRef {
    ActionId action;
    std::size_t trigger;
  };

  void build_index();
  std::vector<ActionId> lookup(std::string_view resolved_api, const SiteShape* shape) const;
  void collect(const std::vector<TriggerRef>& refs, const SiteShape* shape,
               std::vector<ActionId>& out) const;

  std::vector<TaxonomyEntry> entries_;
  std::unordered_map<std::string, std::uint32_t> by_name_;
  std::unordered_map<std::string, std::vector<TriggerRef>> exact_;
  // Keyed by the module path without its trailing ".*".
  std::unordered_map<std::string, std::vector<TriggerRef>> wildcard_;
};

}  // namespace seqguard

template <>
struct std::hash<seqguard::ActionId> {
  std::size_t operator()(seqguard::ActionId id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
