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

#include <set>

#include "common.hpp"
#include "doctest.h"
#include "support.hpp"
#include "taxonomy.hpp"

using namespace seqguard;

namespace {

std::string doc(const std::string& entries) {
  return R"({"version": 1, "entries": [)" + entries + "]}";
}

std::string entry(const std::string& action, const std::string& triggers = "[]",
                  const std::string& description = "Does something.") {
  return R"({"action": ")" + action + R"(", "category": "Basic Network Ops", "description": ")" +
         description + R"(", "triggers": )" + triggers + "}";
}

std::vector<std::string> names_of(const Taxonomy& t, const std::vector<ActionId>& ids) {
  return t.names(ids);
}

ErrorCode code_of(const std::string& text) {
  try {
    Taxonomy::load(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("three-entry taxonomy loads") {
  Taxonomy t = Taxonomy::load(doc(entry("create_socket") + "," + entry("establish_tcp_connection") +
                                  "," + entry("get_env_var")));
  CHECK(t.size() == 3);
  CHECK(t.find("get_env_var").has_value());
  CHECK_FALSE(t.find("nope").has_value());
}

TEST_CASE("duplicate action names are rejected with the entry index") {
  std::string text = doc(entry("get_env_var") + "," + entry("create_socket") + "," +
                         entry("get_env_var"));
  CHECK(code_of(text) == ErrorCode::Validation);
  CHECK_THROWS_WITH(Taxonomy::load(text), doctest::Contains("taxonomy entry 2"));
}

TEST_CASE("descriptions over twenty words are rejected") {
  std::string words;
  for (int i = 0; i < 21; ++i) words += "word ";
  CHECK_THROWS_WITH(Taxonomy::load(doc(entry("x_action", "[]", words))),
                    doctest::Contains("20 words"));
  std::string twenty;
  for (int i = 0; i < 20; ++i) twenty += "word ";
  CHECK(Taxonomy::load(doc(entry("x_action", "[]", twenty))).size() == 1);
}

TEST_CASE("malformed triggers and names are rejected") {
  CHECK(code_of(doc(entry("a_b", R"([{"module_path": "os..system"}])"))) == ErrorCode::Validation);
  CHECK(code_of(doc(entry("a_b", R"([{"module_path": "os.*.x"}])"))) == ErrorCode::Validation);
  CHECK(code_of(doc(entry("a_b", R"([{"module_path": "os.sys*"}])"))) == ErrorCode::Validation);
  CHECK(code_of(doc(entry("Bad-Name"))) == ErrorCode::Validation);
  CHECK(code_of(R"({"version": 1, "entries": [{"action": "x", "category": "Nope", "description": ""}]})") ==
        ErrorCode::Validation);
  CHECK(code_of("not json") == ErrorCode::Parse);
  CHECK(code_of(R"({"version": 2, "entries": []})") == ErrorCode::Parse);
}

TEST_CASE("user-extension categories are accepted") {
  CHECK(is_valid_category("other: Crypto Mining"));
  CHECK_FALSE(is_valid_category("other: "));
  CHECK(is_valid_category("Command & Control"));
  CHECK(builtin_categories().size() == 12);
}

TEST_CASE("seed taxonomy covers all twelve categories") {
  const Taxonomy& seed = Taxonomy::seed();
  CHECK(seed.size() >= 55);
  CHECK(seed.size() <= 70);
  std::set<std::string> categories;
  for (const TaxonomyEntry& e : seed.entries()) {
    categories.insert(e.category);
    CHECK(e.triggers.size() <= 4);
  }
  CHECK(categories.size() == 12);
  // The embedded copy matches the shipped data file.
  CHECK(Taxonomy::load(read_text_file(sgtest::data_dir() / "seed_taxonomy.json")).serialize() ==
        seed.serialize());
}

TEST_CASE("lookup_trigger on the seed taxonomy") {
  const Taxonomy& t = Taxonomy::seed();
  CHECK(names_of(t, t.lookup_trigger("socket.socket")) == std::vector<std::string>{"create_socket"});
  CHECK(names_of(t, t.lookup_trigger("os.system")) ==
        std::vector<std::string>{"execute_shell_command"});
  CHECK(t.lookup_trigger("math.sqrt").empty());
  CHECK(names_of(t, t.lookup_trigger("os.environ.get")) == std::vector<std::string>{"get_env_var"});
  CHECK(names_of(t, t.lookup_trigger("os.environ")) == std::vector<std::string>{"get_env_var"});
  // Argument-qualified triggers all match when arguments are unknown.
  CHECK(names_of(t, t.lookup_trigger("os.dup2")) ==
        std::vector<std::string>{"dup_socket_stderr", "dup_socket_stdin", "dup_socket_stdout"});
}

TEST_CASE("lookup_site honours call_only and last_arg") {
  const Taxonomy& t = Taxonomy::seed();
  CHECK(t.lookup_site("os.system", {false, std::nullopt}).empty());
  CHECK(names_of(t, t.lookup_site("os.dup2", {true, "0"})) ==
        std::vector<std::string>{"dup_socket_stdin"});
  CHECK(names_of(t, t.lookup_site("os.dup2", {true, "sys.stderr.fileno()"})) ==
        std::vector<std::string>{"dup_socket_stderr"});
  CHECK(t.lookup_site("os.dup2", {true, "fd"}).empty());
  CHECK(names_of(t, t.lookup_site("os.environ", {false, std::nullopt})) ==
        std::vector<std::string>{"get_env_var"});
}

TEST_CASE("wildcards match one or more further segments only") {
  Taxonomy t = Taxonomy::load(doc(entry("env_any", R"([{"module_path": "a.b.*", "call_only": false}])")));
  CHECK(t.lookup_trigger("a.b.c").size() == 1);
  CHECK(t.lookup_trigger("a.b.c.d").size() == 1);
  CHECK(t.lookup_trigger("a.b").empty());
  CHECK(t.lookup_trigger("a.bc").empty());
}

TEST_CASE("serialize round trip is byte-identical and sorted") {
  Taxonomy t = Taxonomy::load(doc(entry("zeta_one") + "," + entry("alpha_two")));
  CHECK(t.entries().front().action == "alpha_two");
  std::string once = t.serialize();
  CHECK(Taxonomy::load(once).serialize() == once);
  std::string seed = Taxonomy::seed().serialize();
  CHECK(Taxonomy::load(seed).serialize() == seed);
}

TEST_CASE("action ids order like names") {
  const Taxonomy& t = Taxonomy::seed();
  for (std::size_t i = 1; i < t.size(); ++i)
    CHECK(t.entries()[i - 1].action < t.entries()[i].action);
  CHECK(t.require("create_socket") < t.require("dup_socket_stdin"));
  CHECK_THROWS_AS(t.require("missing_action"), Error);
}
