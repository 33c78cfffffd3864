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

// seqguard command-line interface: mine, build-kb, scan, eval.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqguard/seqguard.h"

namespace {

using Json = nlohmann::json;

constexpr int kExitBenign = 0;
constexpr int kExitMalicious = 1;
constexpr int kExitError = 2;

struct Failure {
  std::string message;
};

void check(sg_status status, const std::string& what) {
  if (status != SG_OK) throw Failure{what + ": " + sg_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using TaxonomyHandle = Handle<sg_taxonomy, sg_taxonomy_free>;
using CorpusHandle = Handle<sg_corpus, sg_corpus_free>;
using PatternsHandle = Handle<sg_patterns, sg_patterns_free>;
using ProvidersHandle = Handle<sg_providers, sg_providers_free>;
using KbHandle = Handle<sg_kb, sg_kb_free>;

std::string take(char* s) {
  std::string out(s ? s : "");
  sg_string_free(s);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{"cannot write '" + path + "'"};
}

struct Options {
  std::string taxonomy;
  std::size_t jobs = 1;

  std::string embedder = "offline";
  std::string reasoner = "offline";
  std::string mapper = "rules";
  std::string embedding_endpoint, embedding_model;
  std::string reasoning_endpoint, reasoning_model;
  std::string mapper_endpoint, mapper_model;
  std::string key_env;
  int timeout_ms = 0;
  int max_in_flight = 0;
  int max_retries = -1;

  std::string corpus;
  std::string supports;
  std::optional<double> tau;
  std::optional<std::size_t> min_pattern_len;
  std::string patterns;
  std::string out;
  std::size_t k = 5;
  bool force = false;
  std::string kb;
  std::string package;
  std::string format = "json";
  bool no_timings = false;
  std::string manifest;
  std::string unscannable = "benign";
};

void load_taxonomy(const Options& o, TaxonomyHandle& t) {
  if (o.taxonomy.empty())
    check(sg_taxonomy_seed(t.out()), "seed taxonomy");
  else
    check(sg_taxonomy_load_file(o.taxonomy.c_str(), t.out()), "taxonomy '" + o.taxonomy + "'");
}

void make_providers(const Options& o, ProvidersHandle& p) {
  Json s = {{"embedder", o.embedder}, {"reasoner", o.reasoner}, {"mapper", o.mapper}};
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) s[key] = v;
  };
  put("embedding_endpoint", o.embedding_endpoint);
  put("embedding_model", o.embedding_model);
  put("reasoning_endpoint", o.reasoning_endpoint);
  put("reasoning_model", o.reasoning_model);
  put("mapper_endpoint", o.mapper_endpoint);
  put("mapper_model", o.mapper_model);
  put("key_env", o.key_env);
  if (o.timeout_ms > 0) s["timeout_ms"] = o.timeout_ms;
  if (o.max_in_flight > 0) s["max_in_flight"] = o.max_in_flight;
  if (o.max_retries >= 0) s["max_retries"] = o.max_retries;
  check(sg_providers_create(s.dump().c_str(), p.out()), "providers");
}

std::vector<std::size_t> parse_supports(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
    }
    if (v <= 0 || used != item.size())
      throw Failure{"--supports: '" + item + "' is not a positive integer"};
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw Failure{"--supports: empty list"};
  return out;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

int cmd_mine(const Options& o) {
  TaxonomyHandle t;
  load_taxonomy(o, t);
  CorpusHandle c;
  check(sg_corpus_load_file(t.get(), o.corpus.c_str(), c.out()), "corpus '" + o.corpus + "'");
  Json config = Json::object();
  if (!o.supports.empty()) config["supports"] = parse_supports(o.supports);
  if (o.tau) config["tau"] = *o.tau;
  if (o.min_pattern_len) config["min_pattern_len"] = *o.min_pattern_len;
  PatternsHandle p;
  check(sg_mine(c.get(), config.dump().c_str(), p.out()), "mine");
  char* text = nullptr;
  check(sg_patterns_to_json(p.get(), &text), "serialize patterns");
  write_file(o.out, take(text));
  char* stats_text = nullptr;
  check(sg_patterns_stats_json(p.get(), &stats_text), "stats");
  Json stats = Json::parse(take(stats_text));
  std::cout << "sequences: " << stats["n_benign"] << " benign, " << stats["n_malicious"]
            << " malicious\n"
            << "deterministic patterns: " << stats["n_det"] << '\n'
            << "justifiable patterns: " << stats["n_just"] << '\n'
            << "optimized patterns: " << stats["n_opt"] << '\n'
            << "coverage: benign " << percent(stats["coverage_benign"].get<double>())
            << ", malicious " << percent(stats["coverage_malicious"].get<double>())
            << ", total " << percent(stats["coverage_total"].get<double>()) << '\n'
            << "wrote " << o.out << '\n';
  return 0;
}

int cmd_build_kb(const Options& o) {
  TaxonomyHandle t;
  load_taxonomy(o, t);
  ProvidersHandle prov;
  make_providers(o, prov);
  PatternsHandle p;
  check(sg_patterns_load_file(t.get(), o.patterns.c_str(), p.out()), "patterns '" + o.patterns + "'");
  CorpusHandle c;
  check(sg_corpus_load_file(t.get(), o.corpus.c_str(), c.out()), "corpus '" + o.corpus + "'");
  KbHandle kb;
  check(sg_kb_build(p.get(), c.get(), prov.get(), o.k, kb.out()), "build knowledge base");
  check(sg_kb_save(kb.get(), o.out.c_str(), o.force ? 1 : 0), "save knowledge base");
  std::cout << "knowledge base: " << sg_kb_entry_count(kb.get()) << " entries, "
            << sg_corpus_size(c.get()) << " cases\nwrote " << o.out << '\n';
  return 0;
}

int cmd_scan(const Options& o) {
  TaxonomyHandle t;
  load_taxonomy(o, t);
  ProvidersHandle prov;
  make_providers(o, prov);
  KbHandle kb;
  check(sg_kb_load(t.get(), o.kb.c_str(), kb.out()), "knowledge base '" + o.kb + "'");
  char* report = nullptr;
  int malicious = 0;
  sg_format format = o.format == "text" ? SG_FORMAT_TEXT : SG_FORMAT_JSON;
  check(sg_scan_package(kb.get(), prov.get(), o.package.c_str(), o.jobs, format,
                        o.no_timings ? 0 : 1, &report, &malicious),
        "scan '" + o.package + "'");
  std::string text = take(report);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(o.out, text);
    std::cout << (malicious ? "malicious" : "benign") << ": " << o.package << '\n';
  }
  return malicious ? kExitMalicious : kExitBenign;
}

int cmd_eval(const Options& o) {
  TaxonomyHandle t;
  load_taxonomy(o, t);
  ProvidersHandle prov;
  make_providers(o, prov);
  KbHandle kb;
  check(sg_kb_load(t.get(), o.kb.c_str(), kb.out()), "knowledge base '" + o.kb + "'");
  char* out = nullptr;
  check(sg_evaluate(kb.get(), prov.get(), o.manifest.c_str(), o.unscannable.c_str(), o.jobs, &out),
        "evaluate '" + o.manifest + "'");
  std::string text = take(out);
  if (o.out.empty()) {
    std::cout << text;
    return 0;
  }
  write_file(o.out, text);
  Json m = Json::parse(text);
  const Json& c = m["counts"];
  std::cout << "packages: " << c["tp"].get<int>() + c["fp"].get<int>() + c["fn"].get<int>() +
                                   c["tn"].get<int>()
            << "\naccuracy: " << percent(m["metrics"]["accuracy"].get<double>())
            << "\nFP: " << c["fp"] << "  FN: " << c["fn"] << "\nwrote " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"seqguard: behavioral pattern mining and malicious package detection"};
  app.set_version_flag("--version", std::string(sg_version()));
  app.set_config("--config", "", "Read options from a key = value configuration file");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--taxonomy", o.taxonomy, "Taxonomy JSON (default: built-in seed)");
  app.add_option("--jobs", o.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  app.add_option("--embedder", o.embedder, "Embedding provider")
      ->check(CLI::IsMember({"offline", "external"}));
  app.add_option("--reasoner", o.reasoner, "Reasoning provider")
      ->check(CLI::IsMember({"offline", "external"}));
  app.add_option("--mapper", o.mapper, "Context-to-action mapper")
      ->check(CLI::IsMember({"rules", "external"}));
  app.add_option("--embedding-endpoint", o.embedding_endpoint);
  app.add_option("--embedding-model", o.embedding_model);
  app.add_option("--reasoning-endpoint", o.reasoning_endpoint);
  app.add_option("--reasoning-model", o.reasoning_model);
  app.add_option("--mapper-endpoint", o.mapper_endpoint);
  app.add_option("--mapper-model", o.mapper_model);
  app.add_option("--key-env", o.key_env, "Environment variable holding the provider key");
  app.add_option("--timeout-ms", o.timeout_ms);
  app.add_option("--max-in-flight", o.max_in_flight);
  app.add_option("--max-retries", o.max_retries);

  CLI::App* mine = app.add_subcommand("mine", "Mine behavioral patterns from a labelled corpus");
  mine->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  mine->add_option("--supports", o.supports, "Descending support levels, e.g. 10,5,3,2");
  mine->add_option("--tau", o.tau, "Justifiable bias threshold");
  mine->add_option("--min-pattern-len", o.min_pattern_len);
  mine->add_option("--out", o.out, "Pattern file to write")->required();

  CLI::App* build = app.add_subcommand("build-kb", "Build the knowledge base");
  build->add_option("--patterns", o.patterns, "Pattern file")->required();
  build->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  build->add_option("--out", o.out, "Knowledge base directory")->required();
  build->add_option("--k", o.k, "Retrieval depth per class")->check(CLI::PositiveNumber);
  build->add_flag("--force", o.force, "Overwrite an existing knowledge base");

  CLI::App* scan = app.add_subcommand("scan", "Scan a package directory");
  scan->add_option("package", o.package, "Package root")->required();
  scan->add_option("--kb", o.kb, "Knowledge base directory")->required();
  scan->add_option("--format", o.format)->check(CLI::IsMember({"json", "text"}));
  scan->add_option("--out", o.out, "Write the report here instead of stdout");
  scan->add_flag("--no-timings", o.no_timings, "Omit timings from the JSON report");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate on a labelled package manifest");
  eval->add_option("--manifest", o.manifest, "JSONL of {package, label}")->required();
  eval->add_option("--kb", o.kb, "Knowledge base directory")->required();
  eval->add_option("--out", o.out, "Write metrics JSON here");
  eval->add_option("--unscannable", o.unscannable, "Prediction for unscannable packages")
      ->check(CLI::IsMember({"benign", "malicious"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (mine->parsed()) return cmd_mine(o);
    if (build->parsed()) return cmd_build_kb(o);
    if (scan->parsed()) return cmd_scan(o);
    if (eval->parsed()) return cmd_eval(o);
  } catch (const Failure& f) {
    std::cerr << "seqguard: " << f.message << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "seqguard: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
