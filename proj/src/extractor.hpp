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

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "providers.hpp"
#include "taxonomy.hpp"

namespace seqguard {

enum class BindingKind {
  Import,    // import x [as y], from x import f [as g]
  Alias,     // name = some.dotted.name
  Instance,  // name = some.Callable(...), with some.Callable(...) as name
  Clear,     // any other rebinding (assignment, def, class)
};

struct Binding {
  std::string name;
  std::string target;
  BindingKind kind = BindingKind::Import;
  std::size_t offset = 0;  // effective from this byte offset on
  std::size_t line = 0;
};

/// Name bindings recorded in source order. Later bindings shadow earlier
/// ones; unbound names resolve to themselves.
class AliasTable {
 public:
  void add(Binding binding);
  /// Resolves `dotted` as seen at byte `offset` (default: end of file).
  std::string resolve(std::string_view dotted,
                      std::size_t offset = std::string::npos) const;
  const std::vector<Binding>& bindings() const { return bindings_; }

 private:
  std::vector<Binding> bindings_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
};

AliasTable resolve_aliases(std::string_view source);

/// A dotted-name reference found in code, before taxonomy filtering.
struct ApiReference {
  std::size_t line = 0;  // 1-based
  std::size_t column = 0;  // 1-based
  std::size_t statement_line = 0;
  std::size_t offset = 0;
  std::string text;
  std::string resolved;
  SiteShape shape;
};

std::vector<ApiReference> find_references(std::string_view source);

struct SensitiveSite {
  std::string file;
  std::size_t line = 0;
  std::size_t column = 0;
  std::size_t statement_line = 0;
  std::string resolved_api;
  ActionList actions;  // taxonomy order, non-empty
};

std::vector<SensitiveSite> locate_sites(std::string_view source, const Taxonomy& taxonomy,
                                        std::string_view file = {});

struct ContextSlice {
  std::size_t line_start = 1;
  std::size_t line_end = 1;
  std::string text;
  std::vector<std::size_t> sites;  // indices into the site list
};

struct SliceOptions {
  std::size_t window = 15;
};

/// Enclosing def/class body per site by indentation, else a +/-window
/// line range; overlapping ranges merge.
std::vector<ContextSlice> slice_context(std::string_view source,
                                        const std::vector<SensitiveSite>& sites,
                                        const SliceOptions& options = {});

struct MappedSequence {
  ActionSequence sequence;  // label unknown, id = file
  std::vector<std::string> warnings;
  bool from_mapper = false;
};

/// Concatenates site actions in source order, or defers to `mapper` when
/// given; mapper output naming unknown actions falls back to the rules.
MappedSequence map_to_sequence(std::string_view file, const std::vector<SensitiveSite>& sites,
                               const std::vector<ContextSlice>& slices,
                               const Taxonomy& taxonomy, SemanticMapper* mapper = nullptr);

struct FileExtraction {
  std::vector<SensitiveSite> sites;
  std::vector<ContextSlice> slices;
  std::optional<MappedSequence> mapped;  // empty when the file has no sites
};

FileExtraction extract_file(std::string_view file, std::string_view source,
                            const Taxonomy& taxonomy, SemanticMapper* mapper = nullptr,
                            const SliceOptions& options = {});

}  // namespace seqguard
