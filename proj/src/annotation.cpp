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

#include "annotation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace seqguard {

namespace {

constexpr std::string_view kTemplateSource = "offline-template";

struct Motif {
  std::string_view label;
  std::vector<std::string_view> any_of_first;   // at least one required
  std::vector<std::string_view> any_of_second;  // at least one required
  bool malicious;
};

const std::vector<Motif>& motifs() {
  static const std::vector<Motif> table = {
      {"reverse shell: socket connection with stdio redirection",
       {"create_socket", "establish_tcp_connection"},
       {"dup_socket_stdin", "dup_socket_stdout", "dup_socket_stderr", "spawn_process_shell"},
       true},
      {"information harvesting: environment and clipboard data collection",
       {"get_env_var", "get_clipboard_text", "get_username", "get_hostname"},
       {"get_clipboard_text", "copy_to_clipboard"},
       true},
      {"credential theft: browser secrets collected for exfiltration",
       {"get_chrome_passwords", "open_sqlite_db"},
       {"get_chrome_passwords", "send_http_post", "send_discord_message", "send_telegram_message"},
       true},
      {"remote payload execution: downloaded content run locally",
       {"download_file_url", "send_http_get"},
       {"exec_python_code", "execute_shell_command", "compile_code_object", "spawn_process_shell"},
       true},
      {"obfuscated loader: decoded payload executed at runtime",
       {"decode_base64_to_bytes", "decompress_zlib", "decrypt_aes_data", "decrypt_fernet_data",
        "convert_int_to_char"},
       {"exec_python_code", "compile_code_object", "load_marshal_code", "import_dynamic"},
       true},
      {"chat-platform exfiltration: harvested data sent through a messaging service",
       {"get_chrome_passwords", "capture_screen_region", "get_os_info", "get_username",
        "get_env_var", "exfiltrate_folder"},
       {"send_discord_message", "send_telegram_message", "create_discord_bot"},
       true},
      {"persistence: autostart registry manipulation",
       {"check_persistence_entry", "set_registry_value"},
       {"set_registry_value", "copy_file", "hide_console_window"},
       true},
      {"system administration: environment-driven subprocess management",
       {"get_env_var"},
       {"spawn_process_no_shell", "read_process_stdout"},
       false},
      {"package installation: path handling around build commands",
       {"path_string_operations"},
       {"execute_shell_command", "spawn_process_no_shell", "exit_program"},
       false},
  };
  return table;
}

bool matches_motif(const Motif& m, const std::set<std::string>& names) {
  auto has_any = [&](const std::vector<std::string_view>& options) {
    return std::any_of(options.begin(), options.end(),
                       [&](std::string_view o) { return names.contains(std::string(o)); });
  };
  return has_any(m.any_of_first) && has_any(m.any_of_second);
}

std::string chain(const Pattern& p, const Taxonomy& taxonomy) {
  std::string out;
  for (ActionId a : p.actions) {
    if (!out.empty()) out += " -> ";
    out += taxonomy.name(a);
  }
  return out;
}

std::string categories(const Pattern& p, const Taxonomy& taxonomy) {
  std::vector<std::string> cats;
  for (ActionId a : p.actions) {
    const std::string& c = taxonomy.entry(a).category;
    if (std::find(cats.begin(), cats.end(), c) == cats.end()) cats.push_back(c);
  }
  std::string out;
  for (const std::string& c : cats) {
    if (!out.empty()) out += " + ";
    out += c;
  }
  return out;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Actions co-occurring with the pattern in one class's cases but never in
// the other's, in name order.
std::vector<std::string> exclusive_context(const std::vector<const ActionSequence*>& mine,
                                           const std::vector<const ActionSequence*>& theirs,
                                           const Pattern& p, const Taxonomy& taxonomy) {
  std::set<ActionId> own, other, in_pattern(p.actions.begin(), p.actions.end());
  for (const ActionSequence* s : mine) own.insert(s->actions.begin(), s->actions.end());
  for (const ActionSequence* s : theirs) other.insert(s->actions.begin(), s->actions.end());
  std::vector<std::string> out;
  for (ActionId a : own)
    if (!other.contains(a) && !in_pattern.contains(a)) out.push_back(taxonomy.name(a));
  return out;
}

std::string join(const std::vector<std::string>& items, std::size_t limit = 6) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

std::vector<std::string> string_list(const Json& obj, const char* key) {
  if (!obj.contains(key)) return {};
  const Json& v = obj[key];
  if (!v.is_array()) throw Error(ErrorCode::Parse, std::string(key) + " must be an array");
  std::vector<std::string> out;
  for (const Json& s : v) {
    if (!s.is_string()) throw Error(ErrorCode::Parse, std::string(key) + " must hold strings");
    if (!s.get_ref<const std::string&>().empty()) out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

bool annotation_satisfies(const Annotation& a, PatternKind kind) {
  switch (kind) {
    case PatternKind::DeterministicMalicious: return !a.attack_vectors.empty();
    case PatternKind::DeterministicBenign: return !a.legitimate_uses.empty();
    case PatternKind::Justifiable: return !a.distinction_rules.empty();
  }
  return false;
}

Annotation template_annotation(const Pattern& pattern, const CasePartition& cases,
                               const Taxonomy& taxonomy) {
  Annotation a;
  a.source = std::string(kTemplateSource);
  std::set<std::string> names;
  for (ActionId id : pattern.actions) names.insert(taxonomy.name(id));
  const std::string seq = chain(pattern, taxonomy);
  const std::string cats = categories(pattern, taxonomy);

  a.summary = std::string(pattern_kind_name(pattern.kind)) + " pattern " + seq + " [" + cats +
              "] covering " + std::to_string(cases.benign.size()) + " benign and " +
              std::to_string(cases.malicious.size()) + " malicious cases";

  switch (pattern.kind) {
    case PatternKind::DeterministicMalicious:
      for (const Motif& m : motifs())
        if (m.malicious && matches_motif(m, names)) a.attack_vectors.emplace_back(m.label);
      if (a.attack_vectors.empty()) a.attack_vectors.push_back(cats + " chain: " + seq);
      break;
    case PatternKind::DeterministicBenign:
      for (const Motif& m : motifs())
        if (!m.malicious && matches_motif(m, names)) a.legitimate_uses.emplace_back(m.label);
      if (a.legitimate_uses.empty())
        a.legitimate_uses.push_back("routine " + cats + " workflow: " + seq);
      break;
    case PatternKind::Justifiable: {
      a.distinction_rules.push_back(
          seq + " leans " + std::string(label_name(pattern.bias_class)) + " (residual ratio " +
          fixed3(pattern.bias_ratio_residual) + "); malicious when data reaches external "
          "endpoints, credentials or system files are the source, or execution is automated at "
          "install or import time; benign when data stays local and the action is user-initiated");
      auto only_mal = exclusive_context(cases.malicious, cases.benign, pattern, taxonomy);
      auto only_ben = exclusive_context(cases.benign, cases.malicious, pattern, taxonomy);
      if (!only_mal.empty())
        a.distinction_rules.push_back("co-occurs only in malicious cases with: " + join(only_mal));
      if (!only_ben.empty())
        a.distinction_rules.push_back("co-occurs only in benign cases with: " + join(only_ben));
      break;
    }
  }
  return a;
}

std::string annotation_prompt(const Pattern& pattern, const CasePartition& cases,
                              const Taxonomy& taxonomy) {
  std::ostringstream out;
  out << "You analyse behavioural patterns mined from Python package code.\n"
      << "Pattern kind: " << pattern_kind_name(pattern.kind) << "\n"
      << "Pattern actions: " << chain(pattern, taxonomy) << "\n"
      << "Bias: " << label_name(pattern.bias_class) << " (" << fixed3(pattern.bias_ratio_residual)
      << ")\n";
  auto emit = [&](const char* title, const std::vector<const ActionSequence*>& group) {
    out << title << " (" << group.size() << "):\n";
    std::size_t shown = 0;
    for (const ActionSequence* s : group) {
      if (shown++ == 8) break;
      out << "- id=" << s->id << " actions=" << join(taxonomy.names(s->actions), 64) << "\n";
      if (s->context) out << "  code:\n" << *s->context << "\n";
    }
  };
  emit("Benign cases", cases.benign);
  emit("Malicious cases", cases.malicious);
  switch (pattern.kind) {
    case PatternKind::DeterministicMalicious:
      out << "Summarise the common characteristics and list the attack vectors.\n";
      break;
    case PatternKind::DeterministicBenign:
      out << "Summarise the common characteristics and list the legitimate use cases.\n";
      break;
    case PatternKind::Justifiable:
      out << "Compare the benign and malicious cases and state distinction rules: contextual "
             "factors (data flow destinations, network endpoints, execution triggers) that "
             "separate them.\n";
      break;
  }
  out << "Reply with one JSON object: {\"summary\": str, \"attack_vectors\": [str], "
         "\"legitimate_uses\": [str], \"distinction_rules\": [str]}.\n";
  return out.str();
}

Annotation annotate(const Pattern& pattern, const CasePartition& cases,
                    const Taxonomy& taxonomy, ReasoningProvider* reasoner) {
  if (!reasoner) return template_annotation(pattern, cases, taxonomy);
  std::string problem;
  try {
    std::string text = reasoner->complete(annotation_prompt(pattern, cases, taxonomy));
    if (auto obj = json_object_in(text)) {
      Annotation a;
      a.summary = obj->value("summary", std::string());
      a.attack_vectors = string_list(*obj, "attack_vectors");
      a.legitimate_uses = string_list(*obj, "legitimate_uses");
      a.distinction_rules = string_list(*obj, "distinction_rules");
      a.source = reasoner->id();
      if (annotation_satisfies(a, pattern.kind)) return a;
      problem = "reply misses the fields required for this pattern kind";
    } else {
      problem = "reply holds no JSON object";
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Provider && e.code() != ErrorCode::Parse) throw;
    problem = e.what();
  } catch (const Json::exception& e) {
    problem = e.what();
  }
  Annotation fallback = template_annotation(pattern, cases, taxonomy);
  fallback.warning = "external annotation unusable (" + problem + "); offline template used";
  return fallback;
}

Json annotation_to_json(const Annotation& a) {
  Json j = {{"summary", a.summary},
            {"attack_vectors", a.attack_vectors},
            {"legitimate_uses", a.legitimate_uses},
            {"distinction_rules", a.distinction_rules},
            {"source", a.source}};
  if (a.warning) j["warning"] = *a.warning;
  return j;
}

Annotation annotation_from_json(const Json& obj) {
  Annotation a;
  try {
    a.summary = obj.at("summary").get<std::string>();
    a.attack_vectors = obj.at("attack_vectors").get<std::vector<std::string>>();
    a.legitimate_uses = obj.at("legitimate_uses").get<std::vector<std::string>>();
    a.distinction_rules = obj.at("distinction_rules").get<std::vector<std::string>>();
    a.source = obj.at("source").get<std::string>();
    if (obj.contains("warning")) a.warning = obj["warning"].get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed annotation: ") + e.what());
  }
  return a;
}

}  // namespace seqguard
