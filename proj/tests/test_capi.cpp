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

#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "seqguard/seqguard.h"

// Exercises the shared library through its C header only.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string take(char* s) {
  std::string out = s ? s : "";
  sg_string_free(s);
  return out;
}

fs::path fixtures() { return SEQGUARD_FIXTURES_DIR; }

fs::path scratch(const std::string& tag) {
  std::mt19937_64 rng(std::random_device{}());
  fs::path p = fs::temp_directory_path() / ("sgcapi-" + tag + "-" + std::to_string(rng()));
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(sg_version()) == SEQGUARD_VERSION);
  CHECK(std::string(sg_status_name(SG_OK)) == "ok");
  CHECK(std::string(sg_status_name(SG_ERR_ALREADY_EXISTS)) == "already exists");
}

TEST_CASE("null arguments and missing files report errors") {
  sg_taxonomy* t = nullptr;
  CHECK(sg_taxonomy_seed(nullptr) == SG_ERR_INVALID_ARGUMENT);
  CHECK(std::string(sg_last_error()).size() > 0);
  CHECK(sg_taxonomy_load_file("/definitely/missing.json", &t) == SG_ERR_IO);
  CHECK(t == nullptr);
  CHECK(std::string(sg_last_error()).find("/definitely/missing.json") != std::string::npos);
  sg_taxonomy_free(nullptr);
  sg_kb_free(nullptr);
}

TEST_CASE("mine, build, save, load, classify, scan and evaluate") {
  sg_taxonomy* t = nullptr;
  REQUIRE(sg_taxonomy_seed(&t) == SG_OK);
  char* tax_text = nullptr;
  REQUIRE(sg_taxonomy_to_json(t, &tax_text) == SG_OK);
  CHECK(json::parse(take(tax_text))["entries"].size() == 63);

  sg_corpus* c = nullptr;
  REQUIRE(sg_corpus_load_file(t, (fixtures() / "corpus.jsonl").c_str(), &c) == SG_OK);
  CHECK(sg_corpus_size(c) == 120);

  sg_patterns* bad = nullptr;
  CHECK(sg_mine(c, "{\"tau\": 1.5}", &bad) == SG_ERR_INVALID_ARGUMENT);
  CHECK(sg_mine(c, "{not json", &bad) == SG_ERR_PARSE);

  sg_patterns* p = nullptr;
  REQUIRE(sg_mine(c, "{\"supports\": [10, 5, 3, 2], \"tau\": 0.9}", &p) == SG_OK);
  CHECK(sg_patterns_count(p) == 12);
  char* stats = nullptr;
  REQUIRE(sg_patterns_stats_json(p, &stats) == SG_OK);
  json js = json::parse(take(stats));
  CHECK(js["n_opt"] == 12);

  sg_providers* prov = nullptr;
  REQUIRE(sg_providers_create(nullptr, &prov) == SG_OK);
  sg_providers* ext = nullptr;
  CHECK(sg_providers_create("{\"embedder\": \"external\", \"embedding_endpoint\": \"\"}", &ext) ==
        SG_ERR_INVALID_ARGUMENT);

  sg_kb* kb = nullptr;
  REQUIRE(sg_kb_build(p, c, prov, 5, &kb) == SG_OK);
  CHECK(sg_kb_entry_count(kb) == 12);

  fs::path dir = scratch("kb");
  REQUIRE(sg_kb_save(kb, (dir / "kb").c_str(), 0) == SG_OK);
  CHECK(sg_kb_save(kb, (dir / "kb").c_str(), 0) == SG_ERR_ALREADY_EXISTS);
  sg_kb* loaded = nullptr;
  REQUIRE(sg_kb_load(t, (dir / "kb").c_str(), &loaded) == SG_OK);
  CHECK(sg_kb_entry_count(loaded) == 12);

  char* verdict = nullptr;
  REQUIRE(sg_classify_json(loaded, prov,
                           "{\"id\": \"x.py\", \"label\": \"unknown\", \"actions\": [\"get_env_var\", "
                           "\"create_socket\", \"establish_tcp_connection\", \"dup_socket_stdin\", "
                           "\"dup_socket_stdout\", \"dup_socket_stderr\"]}",
                           &verdict) == SG_OK);
  json v = json::parse(take(verdict));
  CHECK(v["classification"] == "malicious");
  CHECK(v["stage"] == "deterministic");
  CHECK(v["confidence"] == 1.0);

  char* report = nullptr;
  int malicious = -1;
  REQUIRE(sg_scan_package(loaded, prov, (fixtures() / "packages" / "mal_revshell").c_str(), 2,
                          SG_FORMAT_JSON, 0, &report, &malicious) == SG_OK);
  CHECK(malicious == 1);
  CHECK(json::parse(take(report))["timings_ms"].empty());
  REQUIRE(sg_scan_package(loaded, prov, (fixtures() / "packages" / "clean_crypto").c_str(), 1,
                          SG_FORMAT_TEXT, 1, &report, &malicious) == SG_OK);
  CHECK(malicious == 0);
  CHECK(take(report).find("classification: benign") != std::string::npos);
  CHECK(sg_scan_package(loaded, prov, "/no/such/package", 1, SG_FORMAT_JSON, 0, &report,
                        &malicious) == SG_ERR_IO);

  char* extracted = nullptr;
  REQUIRE(sg_extract_source(t, prov, "a.py", "import os\nos.system('ls')\n", &extracted) == SG_OK);
  json x = json::parse(take(extracted));
  CHECK(x["sites"].size() == 1);
  CHECK(x["sites"][0]["api"] == "os.system");

  char* metrics = nullptr;
  REQUIRE(sg_evaluate(loaded, prov, (fixtures() / "manifest.jsonl").c_str(), "benign", 2, &metrics) ==
          SG_OK);
  json m = json::parse(take(metrics));
  CHECK(m["metrics"]["accuracy"] == 1.0);
  CHECK(m["counts"]["fp"] == 0);
  CHECK(sg_evaluate(loaded, prov, (fixtures() / "manifest.jsonl").c_str(), "drop", 2, &metrics) ==
        SG_ERR_INVALID_ARGUMENT);

  sg_kb_free(loaded);
  sg_kb_free(kb);
  sg_providers_free(prov);
  sg_patterns_free(p);
  sg_corpus_free(c);
  sg_taxonomy_free(t);
  fs::remove_all(dir);
}
