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

#include <atomic>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"

namespace seqguard {

/// Unit-norm embedding stored in single precision; the on-disk format uses
/// the same representation so loaded and freshly built bases agree exactly.
struct Embedding {
  std::vector<float> values;

  std::size_t dimension() const { return values.size(); }
  bool empty() const { return values.empty(); }
  bool operator==(const Embedding&) const = default;
};

double cosine(const Embedding& a, const Embedding& b);

/// Normalizes a raw vector. Zero vectors are rejected (Error(Provider)).
Embedding normalize(std::span<const double> raw);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  // 0 when unknown before the first call.
  virtual std::size_t dimension() const = 0;
  virtual Embedding embed_actions(std::span<const std::string> actions) = 0;
  virtual Embedding embed_text(std::string_view text) = 0;
};

/// Feature hashing into `dimension` buckets: action unigrams and bigrams for
/// sequences, byte trigrams of whitespace-collapsed text for code. Bucket 0
/// is reserved for inputs that produce no features.
class OfflineHashEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 256;
  explicit OfflineHashEmbedder(std::size_t dimension = kDefaultDimension);

  std::string id() const override { return "offline-hash-v1"; }
  std::size_t dimension() const override { return dimension_; }
  Embedding embed_actions(std::span<const std::string> actions) override;
  Embedding embed_text(std::string_view text) override;

  std::size_t bucket(std::string_view feature) const;

 private:
  Embedding finish(std::vector<double>& counts) const;
  std::size_t dimension_;
};

struct HttpEndpoint {
  std::string url;  // scheme://host[:port]/path
  std::string model;
  std::string api_key;
  int timeout_ms = 30000;
  int max_retries = 2;
  int max_in_flight = 4;
};

/// Posts a JSON body and parses a JSON response. Transport failures and
/// non-2xx replies throw a retryable Error(Provider) after retries run out.
class JsonTransport {
 public:
  explicit JsonTransport(HttpEndpoint endpoint);
  Json post(const Json& body);
  const HttpEndpoint& endpoint() const { return endpoint_; }

 private:
  HttpEndpoint endpoint_;
  std::counting_semaphore<64> in_flight_;
};

class ExternalEmbedder final : public EmbeddingProvider {
 public:
  explicit ExternalEmbedder(HttpEndpoint endpoint);
  std::string id() const override { return "external:" + transport_.endpoint().model; }
  std::size_t dimension() const override { return dimension_.load(); }
  Embedding embed_actions(std::span<const std::string> actions) override;
  Embedding embed_text(std::string_view text) override;

 private:
  Embedding request(std::string_view input);
  JsonTransport transport_;
  std::atomic<std::size_t> dimension_{0};
};

/// Free-text completion used for annotation and classification. The
/// offline configuration has no reasoner; callers fall back to templates
/// and similarity voting.
class ReasoningProvider {
 public:
  virtual ~ReasoningProvider() = default;
  virtual std::string id() const = 0;
  virtual std::string complete(const std::string& prompt) = 0;
};

class ExternalReasoner final : public ReasoningProvider {
 public:
  explicit ExternalReasoner(HttpEndpoint endpoint) : transport_(std::move(endpoint)) {}
  std::string id() const override { return "external:" + transport_.endpoint().model; }
  std::string complete(const std::string& prompt) override;

 private:
  JsonTransport transport_;
};

struct MapperSlice {
  std::string file;
  std::size_t line_start = 1;
  std::string text;
};

struct MapperReply {
  std::vector<std::string> actions;
  double order_confidence = 0.0;
};

class SemanticMapper {
 public:
  virtual ~SemanticMapper() = default;
  virtual MapperReply map(std::span<const std::string> taxonomy_actions,
                          std::span<const MapperSlice> slices) = 0;
};

class ExternalSemanticMapper final : public SemanticMapper {
 public:
  explicit ExternalSemanticMapper(HttpEndpoint endpoint) : transport_(std::move(endpoint)) {}
  MapperReply map(std::span<const std::string> taxonomy_actions,
                  std::span<const MapperSlice> slices) override;

 private:
  JsonTransport transport_;
};

struct ProviderSettings {
  std::string embedder = "offline";  // offline | external
  std::string reasoner = "offline";  // offline | external
  std::string mapper = "rules";      // rules | external
  std::string embedding_endpoint;
  std::string embedding_model = "text-embedding-3-large";
  std::string reasoning_endpoint;
  std::string reasoning_model = "gpt-4o";
  std::string mapper_endpoint;
  std::string mapper_model = "gpt-4o";
  std::string key_env = "SEQGUARD_PROVIDER_KEY";
  int timeout_ms = 30000;
  int max_in_flight = 4;
  int max_retries = 2;
};

struct Providers {
  std::shared_ptr<EmbeddingProvider> embedder;
  std::shared_ptr<ReasoningProvider> reasoner;  // null when offline
  std::shared_ptr<SemanticMapper> mapper;       // null for the rule-based mapper
};

/// Builds providers. External providers take their endpoint from the
/// settings or, failing that, from SEQGUARD_PROVIDER_URL; neither present
/// is Error(InvalidArgument).
Providers make_providers(const ProviderSettings& settings);

}  // namespace seqguard
