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

#include "extractor.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace seqguard {

namespace {

enum class Tok { Name, Dot, Open, Close, Comma, Equals, Semicolon, Colon, String, Number, Op, End };

struct Token {
  Tok kind;
  std::size_t begin;
  std::size_t end;
  std::size_t line;
  std::size_t column;
  char bracket = 0;  // for Open/Close
};

bool ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}
bool ident_char(unsigned char c) { return ident_start(c) || std::isdigit(c); }

constexpr std::array<std::string_view, 5> kOps3 = {"**=", "//=", ">>=", "<<=", "..."};
constexpr std::array<std::string_view, 19> kOps2 = {"==", "!=", "<=", ">=", "+=", "-=", "*=",
                                                     "/=", "%=", "&=", "|=", "^=", "@=", ":=",
                                                     "->", "**", "//", "<<", ">>"};

/// Tolerant lexer for Python-like source. Comments start with '#'; line
/// breaks inside brackets or after a backslash do not end a statement.
class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) step();
    emit(Tok::End, pos_, pos_);
    return std::move(tokens_);
  }

 private:
  void emit(Tok kind, std::size_t b, std::size_t e, char bracket = 0) {
    tokens_.push_back({kind, b, e, line_at(b), b - line_start_of(b) + 1, bracket});
  }

  std::size_t line_at(std::size_t offset) {
    while (scan_ < offset && scan_ < src_.size()) {
      if (src_[scan_] == '\n') {
        ++scan_line_;
        scan_line_start_ = scan_ + 1;
      }
      ++scan_;
    }
    return scan_line_;
  }
  std::size_t line_start_of(std::size_t) const { return scan_line_start_; }

  void step() {
    unsigned char c = static_cast<unsigned char>(src_[pos_]);
    if (c == '#') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return;
    }
    if (c == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
      pos_ += 2;
      if (pos_ < src_.size() && src_[pos_ - 1] == '\r' && src_[pos_] == '\n') ++pos_;
      return;
    }
    if (c == '\n') {
      if (depth_ == 0) emit(Tok::End, pos_, pos_ + 1);
      ++pos_;
      return;
    }
    if (std::isspace(c)) {
      ++pos_;
      return;
    }
    if (c == '"' || c == '\'') {
      string_literal(pos_, pos_);
      return;
    }
    if (ident_start(c)) {
      std::size_t b = pos_;
      while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      // String prefixes such as r, b, f, rb directly before a quote.
      if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') && pos_ - b <= 2) {
        std::string_view prefix = src_.substr(b, pos_ - b);
        bool is_prefix = std::all_of(prefix.begin(), prefix.end(), [](char p) {
          return std::string_view("rRbBfFuU").find(p) != std::string_view::npos;
        });
        if (is_prefix) {
          string_literal(b, pos_);
          return;
        }
      }
      emit(Tok::Name, b, pos_);
      return;
    }
    if (std::isdigit(c)) {
      std::size_t b = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
              src_[pos_] == '.'))
        ++pos_;
      emit(Tok::Number, b, pos_);
      return;
    }
    std::string_view rest = src_.substr(pos_);
    for (std::string_view op : kOps3)
      if (rest.starts_with(op)) {
        emit(Tok::Op, pos_, pos_ + 3);
        pos_ += 3;
        return;
      }
    for (std::string_view op : kOps2)
      if (rest.starts_with(op)) {
        emit(Tok::Op, pos_, pos_ + 2);
        pos_ += 2;
        return;
      }
    std::size_t b = pos_++;
    switch (c) {
      case '(': case '[': case '{':
        ++depth_;
        emit(Tok::Open, b, pos_, static_cast<char>(c));
        break;
      case ')': case ']': case '}':
        if (depth_ > 0) --depth_;
        emit(Tok::Close, b, pos_, static_cast<char>(c));
        break;
      case '.': emit(Tok::Dot, b, pos_); break;
      case ',': emit(Tok::Comma, b, pos_); break;
      case '=': emit(Tok::Equals, b, pos_); break;
      case ';': emit(Tok::Semicolon, b, pos_); break;
      case ':': emit(Tok::Colon, b, pos_); break;
      default: emit(Tok::Op, b, pos_); break;
    }
  }

  // `quote_at` points at the opening quote; `begin` includes any prefix.
  void string_literal(std::size_t begin, std::size_t quote_at) {
    char q = src_[quote_at];
    bool triple = src_.substr(quote_at, 3) == std::string(3, q);
    pos_ = quote_at + (triple ? 3 : 1);
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (triple) {
        if (src_.substr(pos_, 3) == std::string(3, q)) {
          pos_ += 3;
          break;
        }
      } else {
        if (c == q) {
          ++pos_;
          break;
        }
        if (c == '\n') break;  // unterminated; end at the line break
      }
      ++pos_;
    }
    pos_ = std::min(pos_, src_.size());
    emit(Tok::String, begin, pos_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::size_t scan_ = 0;
  std::size_t scan_line_ = 1;
  std::size_t scan_line_start_ = 0;
  std::vector<Token> tokens_;
};

struct Statement {
  std::size_t first;  // token range [first, last)
  std::size_t last;
};

std::vector<Statement> split_statements(const std::vector<Token>& toks) {
  std::vector<Statement> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    Tok k = toks[i].kind;
    if (k == Tok::Open) ++depth;
    if (k == Tok::Close && depth > 0) --depth;
    bool boundary = k == Tok::End || (k == Tok::Semicolon && depth == 0);
    if (!boundary) continue;
    if (i > start) out.push_back({start, i});
    start = i + 1;
    if (k == Tok::End) depth = 0;
  }
  return out;
}

const std::set<std::string_view>& keywords() {
  static const std::set<std::string_view> kw = {
      "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
      "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
      "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
      "try", "while", "with", "yield"};
  return kw;
}

class Analyzer {
 public:
  explicit Analyzer(std::string_view src) : src_(src), toks_(Lexer(src).run()) {}

  void run() {
    for (const Statement& st : split_statements(toks_)) statement(st);
  }

  AliasTable table;
  std::vector<ApiReference> references;
  std::vector<std::size_t> statement_lines;

 private:
  std::string_view text(const Token& t) const { return src_.substr(t.begin, t.end - t.begin); }
  bool is_name(std::size_t i, std::string_view word) const {
    return toks_[i].kind == Tok::Name && text(toks_[i]) == word;
  }

  // Reads Name(.Name)* from i; returns the dotted text and advances i.
  std::string dotted(std::size_t& i, std::size_t last) const {
    std::string out;
    if (i >= last || toks_[i].kind != Tok::Name) return out;
    out = std::string(text(toks_[i++]));
    while (i + 1 < last && toks_[i].kind == Tok::Dot && toks_[i + 1].kind == Tok::Name) {
      out += '.';
      out += text(toks_[i + 1]);
      i += 2;
    }
    return out;
  }

  std::size_t matching_close(std::size_t open, std::size_t last) const {
    int depth = 0;
    for (std::size_t i = open; i < last; ++i) {
      if (toks_[i].kind == Tok::Open) ++depth;
      if (toks_[i].kind == Tok::Close && --depth == 0) return i;
    }
    return last;
  }

  std::string last_argument(std::size_t open, std::size_t close) const {
    std::size_t seg_begin = open + 1;
    std::size_t best_begin = seg_begin, best_end = seg_begin;
    int depth = 0;
    for (std::size_t i = open + 1; i < close; ++i) {
      Tok k = toks_[i].kind;
      if (k == Tok::Open) ++depth;
      if (k == Tok::Close) --depth;
      if (k == Tok::Comma && depth == 0) {
        if (i > seg_begin) best_begin = seg_begin, best_end = i;
        seg_begin = i + 1;
      }
    }
    if (close > seg_begin) best_begin = seg_begin, best_end = close;
    if (best_end <= best_begin) return {};
    std::string out;
    std::string_view raw =
        src_.substr(toks_[best_begin].begin, toks_[best_end - 1].end - toks_[best_begin].begin);
    for (char c : raw)
      if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    // Alias-resolve a leading dotted name: after `import sys as z`,
    // `z.stdin.fileno()` reads as `sys.stdin.fileno()`.
    if (toks_[best_begin].kind == Tok::Name) {
      std::size_t n = 0;
      while (n < out.size() && (std::isalnum(static_cast<unsigned char>(out[n])) || out[n] == '_' ||
                                out[n] == '.'))
        ++n;
      while (n > 0 && out[n - 1] == '.') --n;
      out = table.resolve(out.substr(0, n), toks_[best_begin].begin) + out.substr(n);
    }
    return out;
  }

  void bind(std::string name, std::string target, BindingKind kind, const Statement& st) {
    std::size_t end = toks_[st.last - 1].end;
    table.add({std::move(name), std::move(target), kind, end, toks_[st.first].line});
  }

  void import_statement(const Statement& st) {
    std::size_t i = st.first + 1;
    while (i < st.last) {
      std::size_t start = i;
      std::string module = dotted(i, st.last);
      if (module.empty()) break;
      if (i + 1 < st.last && is_name(i, "as") && toks_[i + 1].kind == Tok::Name) {
        bind(std::string(text(toks_[i + 1])), module, BindingKind::Import, st);
        i += 2;
      } else {
        std::string head = module.substr(0, module.find('.'));
        bind(head, head, BindingKind::Import, st);
      }
      if (i < st.last && toks_[i].kind == Tok::Comma) ++i;
      if (i == start) break;
    }
  }

  void from_statement(const Statement& st) {
    std::size_t i = st.first + 1;
    std::string module;
    while (i < st.last && (toks_[i].kind == Tok::Dot ||
                           (toks_[i].kind == Tok::Op && text(toks_[i]) == "..."))) {
      module += text(toks_[i]);
      ++i;
    }
    module += dotted(i, st.last);
    if (i >= st.last || !is_name(i, "import")) return;
    ++i;
    while (i < st.last) {
      Tok k = toks_[i].kind;
      if (k == Tok::Open || k == Tok::Close || k == Tok::Comma) {
        ++i;
        continue;
      }
      if (k != Tok::Name) break;  // '*' and anything else
      std::string name(text(toks_[i++]));
      std::string alias = name;
      if (i + 1 < st.last && is_name(i, "as") && toks_[i + 1].kind == Tok::Name) {
        alias = std::string(text(toks_[i + 1]));
        i += 2;
      }
      bool relative_root = !module.empty() && module.back() == '.';
      bind(alias, relative_root ? module + name : module + "." + name, BindingKind::Import, st);
    }
  }

  // Records call/reference chains and returns the statement's binding
  // effects, applied after the statement.
  void scan_chains(const Statement& st) {
    for (std::size_t i = st.first; i < st.last; ++i) {
      if (toks_[i].kind != Tok::Name) continue;
      if (i > st.first && toks_[i - 1].kind == Tok::Dot) continue;
      if (i > st.first && (is_name(i - 1, "def") || is_name(i - 1, "class"))) continue;
      std::size_t j = i;
      std::string chain = dotted(j, st.last);
      if (keywords().contains(chain)) continue;
      ApiReference ref;
      ref.line = toks_[i].line;
      ref.column = toks_[i].column;
      ref.statement_line = toks_[st.first].line;
      ref.offset = toks_[i].begin;
      ref.text = chain;
      ref.resolved = table.resolve(chain, toks_[i].begin);
      ref.shape.is_call = j < st.last && toks_[j].kind == Tok::Open && toks_[j].bracket == '(';
      if (ref.shape.is_call) {
        std::size_t close = matching_close(j, st.last);
        std::string arg = last_argument(j, close);
        if (!arg.empty()) ref.shape.last_arg = std::move(arg);
      }
      references.push_back(std::move(ref));
      i = j - 1;
    }
  }

  void assignment_bindings(const Statement& st) {
    const std::size_t f = st.first;
    // def/class rebind their name.
    std::size_t head = f;
    if (is_name(head, "async") && head + 1 < st.last) ++head;
    if ((is_name(head, "def") || is_name(head, "class")) && head + 1 < st.last &&
        toks_[head + 1].kind == Tok::Name) {
      std::string name(text(toks_[head + 1]));
      bind(name, name, BindingKind::Clear, st);
      return;
    }
    // with A(...) as x[, B(...) as y]:
    if (is_name(head, "with")) {
      std::size_t i = head + 1;
      while (i < st.last) {
        std::size_t j = i;
        std::string chain = dotted(j, st.last);
        std::size_t after = j;
        if (!chain.empty() && j < st.last && toks_[j].kind == Tok::Open)
          after = matching_close(j, st.last) + 1;
        if (after + 1 < st.last && is_name(after, "as") && toks_[after + 1].kind == Tok::Name) {
          std::string name(text(toks_[after + 1]));
          bool call = after != j;
          if (!chain.empty() && call)
            bind(name, table.resolve(chain, toks_[i].begin), BindingKind::Instance, st);
          else
            bind(name, name, BindingKind::Clear, st);
          i = after + 2;
        } else {
          ++i;
        }
        while (i < st.last && toks_[i].kind != Tok::Comma && toks_[i].kind != Tok::Colon) ++i;
        if (i >= st.last || toks_[i].kind == Tok::Colon) break;
        ++i;
      }
      return;
    }
    // name = <rhs>
    if (st.last - f < 3 || toks_[f].kind != Tok::Name || toks_[f + 1].kind != Tok::Equals) return;
    std::string name(text(toks_[f]));
    std::size_t j = f + 2;
    std::string chain = dotted(j, st.last);
    if (!chain.empty() && !keywords().contains(chain)) {
      std::string resolved = table.resolve(chain, toks_[f + 2].begin);
      if (j == st.last) {
        bind(name, resolved, BindingKind::Alias, st);
        return;
      }
      if (toks_[j].kind == Tok::Open && toks_[j].bracket == '(' &&
          matching_close(j, st.last) + 1 == st.last) {
        bind(name, resolved, BindingKind::Instance, st);
        return;
      }
    }
    bind(name, name, BindingKind::Clear, st);
  }

  void statement(const Statement& st) {
    statement_lines.push_back(toks_[st.first].line);
    if (is_name(st.first, "import")) {
      import_statement(st);
      return;
    }
    if (is_name(st.first, "from")) {
      from_statement(st);
      return;
    }
    scan_chains(st);
    assignment_bindings(st);
  }

  std::string_view src_;
  std::vector<Token> toks_;
};

struct LineInfo {
  std::size_t indent = 0;
  bool blank = true;
  bool statement_start = false;
  std::string_view text;
};

std::vector<LineInfo> line_infos(std::string_view source,
                                 const std::vector<std::size_t>& statement_lines) {
  std::vector<LineInfo> lines;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t nl = source.find('\n', pos);
    std::string_view line = source.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    LineInfo info;
    info.text = line;
    std::size_t col = 0;
    std::size_t k = 0;
    for (; k < line.size() && (line[k] == ' ' || line[k] == '\t'); ++k)
      col = line[k] == '\t' ? (col / 8 + 1) * 8 : col + 1;
    info.indent = col;
    info.blank = k == line.size() || line[k] == '#';
    lines.push_back(info);
    if (nl == std::string_view::npos || nl + 1 == source.size()) break;
    pos = nl + 1;
  }
  for (std::size_t l : statement_lines)
    if (l >= 1 && l <= lines.size()) lines[l - 1].statement_start = true;
  return lines;
}

bool is_block_header(std::string_view line) {
  std::size_t k = line.find_first_not_of(" \t");
  if (k == std::string_view::npos) return false;
  line.remove_prefix(k);
  return line.starts_with("def ") || line.starts_with("class ") ||
         line.starts_with("async def ");
}

}  // namespace

void AliasTable::add(Binding binding) {
  by_name_[binding.name].push_back(bindings_.size());
  bindings_.push_back(std::move(binding));
}

std::string AliasTable::resolve(std::string_view dotted, std::size_t offset) const {
  std::size_t dot = dotted.find('.');
  std::string head(dotted.substr(0, dot));
  auto it = by_name_.find(head);
  if (it == by_name_.end()) return std::string(dotted);
  const Binding* active = nullptr;
  for (std::size_t idx : it->second) {
    if (bindings_[idx].offset > offset) break;
    active = &bindings_[idx];
  }
  if (!active || active->kind == BindingKind::Clear) return std::string(dotted);
  if (active->kind == BindingKind::Instance && dot == std::string_view::npos)
    return std::string(dotted);
  std::string out = active->target;
  if (dot != std::string_view::npos) out += dotted.substr(dot);
  return out;
}

AliasTable resolve_aliases(std::string_view source) {
  Analyzer a(source);
  a.run();
  return std::move(a.table);
}

std::vector<ApiReference> find_references(std::string_view source) {
  Analyzer a(source);
  a.run();
  return std::move(a.references);
}

std::vector<SensitiveSite> locate_sites(std::string_view source, const Taxonomy& taxonomy,
                                        std::string_view file) {
  std::vector<SensitiveSite> sites;
  for (ApiReference& ref : find_references(source)) {
    ActionList actions = taxonomy.lookup_site(ref.resolved, ref.shape);
    if (actions.empty()) continue;
    sites.push_back({std::string(file), ref.line, ref.column, ref.statement_line,
                     std::move(ref.resolved), std::move(actions)});
  }
  return sites;
}

std::vector<ContextSlice> slice_context(std::string_view source,
                                        const std::vector<SensitiveSite>& sites,
                                        const SliceOptions& options) {
  Analyzer analyzer(source);
  analyzer.run();
  std::vector<LineInfo> lines = line_infos(source, analyzer.statement_lines);
  const std::size_t n = lines.size();

  struct Range {
    std::size_t start, end;
    std::vector<std::size_t> sites;
  };
  std::vector<Range> ranges;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    std::size_t at = std::clamp<std::size_t>(
        sites[s].statement_line ? sites[s].statement_line : sites[s].line, 1, n);
    std::size_t threshold = lines[at - 1].indent;
    std::optional<std::size_t> header;
    for (std::size_t j = at - 1; j >= 1 && threshold > 0; --j) {
      const LineInfo& li = lines[j - 1];
      if (li.blank || !li.statement_start || li.indent >= threshold) continue;
      if (is_block_header(li.text)) {
        header = j;
        break;
      }
      threshold = li.indent;
    }
    Range r;
    if (header) {
      r.start = *header;
      r.end = *header;
      const std::size_t base = lines[*header - 1].indent;
      for (std::size_t j = *header + 1; j <= n; ++j) {
        const LineInfo& li = lines[j - 1];
        if (li.blank) continue;
        if (li.statement_start && li.indent <= base) break;
        r.end = j;
      }
    } else {
      r.start = at > options.window ? at - options.window : 1;
      r.end = std::min(n, at + options.window);
    }
    r.sites.push_back(s);
    ranges.push_back(std::move(r));
  }
  std::sort(ranges.begin(), ranges.end(), [](const Range& a, const Range& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  std::vector<Range> merged;
  for (Range& r : ranges) {
    if (!merged.empty() && r.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, r.end);
      merged.back().sites.insert(merged.back().sites.end(), r.sites.begin(), r.sites.end());
    } else {
      merged.push_back(std::move(r));
    }
  }
  std::vector<ContextSlice> out;
  for (Range& r : merged) {
    ContextSlice slice;
    slice.line_start = r.start;
    slice.line_end = r.end;
    for (std::size_t l = r.start; l <= r.end; ++l) {
      slice.text += lines[l - 1].text;
      if (l < r.end) slice.text += '\n';
    }
    std::sort(r.sites.begin(), r.sites.end());
    slice.sites = std::move(r.sites);
    out.push_back(std::move(slice));
  }
  return out;
}

MappedSequence map_to_sequence(std::string_view file, const std::vector<SensitiveSite>& sites,
                               const std::vector<ContextSlice>& slices,
                               const Taxonomy& taxonomy, SemanticMapper* mapper) {
  if (sites.empty()) throw Error(ErrorCode::InvalidArgument, "no sensitive sites to map");
  MappedSequence out;
  out.sequence.id = std::string(file);
  out.sequence.label = Label::Unknown;
  std::string context;
  for (const ContextSlice& s : slices) {
    if (!context.empty()) context += "\n...\n";
    context += s.text;
  }
  if (!context.empty()) out.sequence.context = std::move(context);

  ActionList rules;
  for (const SensitiveSite& site : sites)
    rules.insert(rules.end(), site.actions.begin(), site.actions.end());

  if (mapper) {
    std::vector<std::string> vocabulary;
    for (const TaxonomyEntry& e : taxonomy.entries()) vocabulary.push_back(e.action);
    std::vector<MapperSlice> request;
    for (const ContextSlice& s : slices) request.push_back({std::string(file), s.line_start, s.text});
    try {
      MapperReply reply = mapper->map(vocabulary, request);
      ActionList mapped;
      std::string unknown;
      for (const std::string& a : reply.actions) {
        if (auto id = taxonomy.find(a))
          mapped.push_back(*id);
        else if (unknown.empty())
          unknown = a;
      }
      if (!unknown.empty())
        out.warnings.push_back("mapper returned unknown action '" + unknown + "'; rule-based sequence used");
      else if (mapped.empty())
        out.warnings.push_back("mapper returned no actions; rule-based sequence used");
      else {
        out.sequence.actions = std::move(mapped);
        out.from_mapper = true;
        return out;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Provider) throw;
      out.warnings.push_back(std::string("mapper unavailable (") + e.what() + "); rule-based sequence used");
    }
  }
  out.sequence.actions = std::move(rules);
  return out;
}

FileExtraction extract_file(std::string_view file, std::string_view source,
                            const Taxonomy& taxonomy, SemanticMapper* mapper,
                            const SliceOptions& options) {
  FileExtraction fx;
  fx.sites = locate_sites(source, taxonomy, file);
  if (fx.sites.empty()) return fx;
  fx.slices = slice_context(source, fx.sites, options);
  fx.mapped = map_to_sequence(file, fx.sites, fx.slices, taxonomy, mapper);
  return fx;
}

}  // namespace seqguard
