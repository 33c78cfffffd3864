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

#include "seqguard/seqguard.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "detector.hpp"
#include "evaluation.hpp"
#include "extractor.hpp"
#include "knowledge.hpp"
#include "miner.hpp"
#include "providers.hpp"
#include "taxonomy.hpp"

#ifndef SEQGUARD_VERSION
#define SEQGUARD_VERSION "0.0.0"
#endif

using namespace seqguard;

struct sg_taxonomy {
  std::shared_ptr<const Taxonomy> taxonomy;
};
struct sg_corpus {
  std::shared_ptr<const Taxonomy> taxonomy;
  Corpus corpus;
};
struct sg_patterns {
  std::shared_ptr<const Taxonomy> taxonomy;
  PatternFile file;
};
struct sg_providers {
  Providers providers;
};
struct sg_kb {
  std::shared_ptr<const Taxonomy> taxonomy;
  KnowledgeBase kb;
};

namespace {

thread_local std::string g_last_error;

sg_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return SG_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return SG_ERR_IO;
    case ErrorCode::Parse: return SG_ERR_PARSE;
    case ErrorCode::Validation: return SG_ERR_VALIDATION;
    case ErrorCode::Provider: return SG_ERR_PROVIDER;
    case ErrorCode::DimensionMismatch: return SG_ERR_DIMENSION_MISMATCH;
    case ErrorCode::AlreadyExists: return SG_ERR_ALREADY_EXISTS;
    case ErrorCode::Internal: return SG_ERR_INTERNAL;
  }
  return SG_ERR_INTERNAL;
}

template <typename F>
sg_status guarded(F&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SG_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const Json::exception& e) {
    g_last_error = e.what();
    return SG_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SG_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

Json parse_object(const char* text, const char* what) {
  if (!text) return Json::object();
  Json j = Json::parse(text);
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be a JSON object");
  return j;
}

MiningConfig mining_config(const Json& j) {
  MiningConfig c;
  if (j.contains("supports")) c.supports = j["supports"].get<std::vector<std::size_t>>();
  if (j.contains("tau")) c.tau = j["tau"].get<double>();
  if (j.contains("min_pattern_len")) c.min_pattern_len = j["min_pattern_len"].get<std::size_t>();
  c.validate();
  return c;
}

ProviderSettings provider_settings(const Json& j) {
  ProviderSettings s;
  auto str = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j[key].get<std::string>();
  };
  auto num = [&](const char* key, int& field) {
    if (j.contains(key)) field = j[key].get<int>();
  };
  str("embedder", s.embedder);
  str("reasoner", s.reasoner);
  str("mapper", s.mapper);
  str("embedding_endpoint", s.embedding_endpoint);
  str("embedding_model", s.embedding_model);
  str("reasoning_endpoint", s.reasoning_endpoint);
  str("reasoning_model", s.reasoning_model);
  str("mapper_endpoint", s.mapper_endpoint);
  str("mapper_model", s.mapper_model);
  str("key_env", s.key_env);
  num("timeout_ms", s.timeout_ms);
  num("max_in_flight", s.max_in_flight);
  num("max_retries", s.max_retries);
  return s;
}

Json stats_json(const MiningStats& s) {
  return {{"n_benign", s.n_benign},
          {"n_malicious", s.n_malicious},
          {"n_det", s.n_det},
          {"n_just", s.n_just},
          {"n_opt", s.n_opt},
          {"coverage_benign", s.coverage_benign},
          {"coverage_malicious", s.coverage_malicious},
          {"coverage_total", s.coverage_total}};
}

}  // namespace

extern "C" {

const char* sg_version(void) { return SEQGUARD_VERSION; }

const char* sg_last_error(void) { return g_last_error.c_str(); }

const char* sg_status_name(sg_status status) {
  switch (status) {
    case SG_OK: return "ok";
    case SG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SG_ERR_IO: return "i/o error";
    case SG_ERR_PARSE: return "parse error";
    case SG_ERR_VALIDATION: return "validation error";
    case SG_ERR_PROVIDER: return "provider error";
    case SG_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case SG_ERR_ALREADY_EXISTS: return "already exists";
    case SG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void sg_string_free(char* s) { std::free(s); }

sg_status sg_taxonomy_seed(sg_taxonomy** out) {
  return guarded([&] {
    require(out, "out");
    *out = new sg_taxonomy{std::make_shared<const Taxonomy>(Taxonomy::seed())};
  });
}

sg_status sg_taxonomy_load_file(const char* path, sg_taxonomy** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sg_taxonomy{std::make_shared<const Taxonomy>(Taxonomy::load(read_text_file(path)))};
  });
}

sg_status sg_taxonomy_to_json(const sg_taxonomy* t, char** out) {
  return guarded([&] {
    require(t, "taxonomy");
    require(out, "out");
    *out = dup_string(t->taxonomy->serialize());
  });
}

void sg_taxonomy_free(sg_taxonomy* t) { delete t; }

sg_status sg_corpus_load_file(const sg_taxonomy* t, const char* path, sg_corpus** out) {
  return guarded([&] {
    require(t, "taxonomy");
    require(path, "path");
    require(out, "out");
    *out = new sg_corpus{t->taxonomy, Corpus::load_file(path, *t->taxonomy)};
  });
}

size_t sg_corpus_size(const sg_corpus* c) { return c ? c->corpus.size() : 0; }

void sg_corpus_free(sg_corpus* c) { delete c; }

sg_status sg_mine(const sg_corpus* c, const char* config_json, sg_patterns** out) {
  return guarded([&] {
    require(c, "corpus");
    require(out, "out");
    MiningConfig config = mining_config(parse_object(config_json, "mining config"));
    MiningResult result = hierarchical_mine(c->corpus, config, *c->taxonomy);
    *out = new sg_patterns{c->taxonomy, to_pattern_file(result)};
  });
}

sg_status sg_patterns_load_file(const sg_taxonomy* t, const char* path, sg_patterns** out) {
  return guarded([&] {
    require(t, "taxonomy");
    require(path, "path");
    require(out, "out");
    *out = new sg_patterns{t->taxonomy, parse_pattern_file(read_text_file(path), *t->taxonomy)};
  });
}

sg_status sg_patterns_to_json(const sg_patterns* p, char** out) {
  return guarded([&] {
    require(p, "patterns");
    require(out, "out");
    *out = dup_string(serialize_pattern_file(p->file, *p->taxonomy));
  });
}

sg_status sg_patterns_stats_json(const sg_patterns* p, char** out) {
  return guarded([&] {
    require(p, "patterns");
    require(out, "out");
    *out = dup_string(stats_json(p->file.stats).dump());
  });
}

size_t sg_patterns_count(const sg_patterns* p) { return p ? p->file.patterns.size() : 0; }

void sg_patterns_free(sg_patterns* p) { delete p; }

sg_status sg_providers_create(const char* settings_json, sg_providers** out) {
  return guarded([&] {
    require(out, "out");
    ProviderSettings s = provider_settings(parse_object(settings_json, "provider settings"));
    *out = new sg_providers{make_providers(s)};
  });
}

void sg_providers_free(sg_providers* p) { delete p; }

sg_status sg_kb_build(const sg_patterns* p, const sg_corpus* c, const sg_providers* prov,
                      size_t k, sg_kb** out) {
  return guarded([&] {
    require(p, "patterns");
    require(c, "corpus");
    require(prov, "providers");
    require(out, "out");
    if (p->taxonomy != c->taxonomy)
      throw Error(ErrorCode::InvalidArgument, "patterns and corpus use different taxonomies");
    KnowledgeBase kb = KnowledgeBase::build(p->file.patterns, c->corpus, *c->taxonomy,
                                            *prov->providers.embedder,
                                            prov->providers.reasoner.get(), k);
    *out = new sg_kb{c->taxonomy, std::move(kb)};
  });
}

sg_status sg_kb_save(const sg_kb* kb, const char* dir, int force) {
  return guarded([&] {
    require(kb, "kb");
    require(dir, "dir");
    kb->kb.save(dir, *kb->taxonomy, force != 0);
  });
}

sg_status sg_kb_load(const sg_taxonomy* t, const char* dir, sg_kb** out) {
  return guarded([&] {
    require(t, "taxonomy");
    require(dir, "dir");
    require(out, "out");
    *out = new sg_kb{t->taxonomy, KnowledgeBase::load(dir, *t->taxonomy)};
  });
}

size_t sg_kb_entry_count(const sg_kb* kb) { return kb ? kb->kb.entries().size() : 0; }

void sg_kb_free(sg_kb* kb) { delete kb; }

sg_status sg_classify_json(const sg_kb* kb, const sg_providers* prov, const char* sequence_json,
                           char** verdict_json) {
  return guarded([&] {
    require(kb, "kb");
    require(prov, "providers");
    require(sequence_json, "sequence_json");
    require(verdict_json, "verdict_json");
    ActionSequence s = sequence_from_json(Json::parse(sequence_json), *kb->taxonomy);
    Detector detector(*kb->taxonomy, kb->kb, prov->providers);
    *verdict_json = dup_string(verdict_to_json(detector.classify(s), *kb->taxonomy).dump());
  });
}

sg_status sg_scan_package(const sg_kb* kb, const sg_providers* prov, const char* root,
                          size_t jobs, sg_format format, int include_timings, char** report,
                          int* malicious) {
  return guarded([&] {
    require(kb, "kb");
    require(prov, "providers");
    require(root, "root");
    require(report, "report");
    Detector detector(*kb->taxonomy, kb->kb, prov->providers);
    DetectionReport r = scan_package(detector, root, jobs);
    std::string text = format == SG_FORMAT_TEXT
                           ? report_to_text(r)
                           : dump_canonical(report_to_json(r, *kb->taxonomy, include_timings != 0));
    if (malicious) *malicious = r.classification == Label::Malicious ? 1 : 0;
    *report = dup_string(text);
  });
}

sg_status sg_extract_source(const sg_taxonomy* t, const sg_providers* prov, const char* file_name,
                            const char* source, char** out) {
  return guarded([&] {
    require(t, "taxonomy");
    require(file_name, "file_name");
    require(source, "source");
    require(out, "out");
    SemanticMapper* mapper = prov ? prov->providers.mapper.get() : nullptr;
    FileExtraction fx = extract_file(file_name, source, *t->taxonomy, mapper);
    Json sites = Json::array();
    for (const SensitiveSite& s : fx.sites)
      sites.push_back({{"line", s.line},
                       {"column", s.column},
                       {"statement_line", s.statement_line},
                       {"api", s.resolved_api},
                       {"actions", t->taxonomy->names(s.actions)}});
    Json slices = Json::array();
    for (const ContextSlice& s : fx.slices)
      slices.push_back({{"line_start", s.line_start}, {"line_end", s.line_end}, {"text", s.text}});
    Json j = {{"sites", sites}, {"slices", slices}, {"sequence", nullptr}, {"warnings", Json::array()}};
    if (fx.mapped) {
      j["sequence"] = sequence_to_json(fx.mapped->sequence, *t->taxonomy);
      j["warnings"] = fx.mapped->warnings;
    }
    *out = dup_string(dump_canonical(j));
  });
}

sg_status sg_evaluate(const sg_kb* kb, const sg_providers* prov, const char* manifest,
                      const char* unscannable_policy, size_t jobs, char** metrics_json) {
  return guarded([&] {
    require(kb, "kb");
    require(prov, "providers");
    require(manifest, "manifest");
    require(metrics_json, "metrics_json");
    UnscannablePolicy policy =
        parse_unscannable_policy(unscannable_policy ? unscannable_policy : "benign");
    std::vector<LabeledPackage> packages = load_manifest(manifest);
    Detector detector(*kb->taxonomy, kb->kb, prov->providers);
    Evaluation ev = evaluate_corpus(detector, packages, policy, jobs);
    *metrics_json = dup_string(dump_canonical(metrics_to_json(ev)));
  });
}

}  // extern "C"
