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

#include "providers.hpp"

#include <cmath>
#include <cstdlib>

#include "httplib.h"

namespace seqguard {

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dimension() != b.dimension())
    throw Error(ErrorCode::DimensionMismatch,
                "embedding dimensions differ: " + std::to_string(a.dimension()) + " vs " +
                    std::to_string(b.dimension()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    double x = a.values[i], y = b.values[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

Embedding normalize(std::span<const double> raw) {
  double norm = 0.0;
  for (double v : raw) norm += v * v;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw Error(ErrorCode::Provider, "embedding is zero or non-finite");
  Embedding e;
  e.values.reserve(raw.size());
  for (double v : raw) e.values.push_back(static_cast<float>(v / norm));
  return e;
}

OfflineHashEmbedder::OfflineHashEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ < 2) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 2");
}

std::size_t OfflineHashEmbedder::bucket(std::string_view feature) const {
  return 1 + static_cast<std::size_t>(fnv1a64(feature) % (dimension_ - 1));
}

Embedding OfflineHashEmbedder::finish(std::vector<double>& counts) const {
  bool any = false;
  for (double c : counts) any = any || c != 0.0;
  if (!any) counts[0] = 1.0;
  return normalize(counts);
}

Embedding OfflineHashEmbedder::embed_actions(std::span<const std::string> actions) {
  std::vector<double> counts(dimension_, 0.0);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    counts[bucket("u:" + actions[i])] += 1.0;
    if (i + 1 < actions.size()) counts[bucket("b:" + actions[i] + '\x1f' + actions[i + 1])] += 1.0;
  }
  return finish(counts);
}

Embedding OfflineHashEmbedder::embed_text(std::string_view text) {
  std::string collapsed;
  collapsed.reserve(text.size());
  for (char c : text) {
    bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (space) {
      if (!collapsed.empty() && collapsed.back() != ' ') collapsed.push_back(' ');
    } else {
      collapsed.push_back(c);
    }
  }
  if (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();

  std::vector<double> counts(dimension_, 0.0);
  std::string feature = "c:...";
  for (std::size_t i = 0; i + 3 <= collapsed.size(); ++i) {
    feature.replace(2, 3, collapsed, i, 3);
    counts[bucket(feature)] += 1.0;
  }
  return finish(counts);
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos || url.empty())
    throw Error(ErrorCode::InvalidArgument, "endpoint '" + url + "' is not an absolute URL");
  std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

JsonTransport::JsonTransport(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      in_flight_(std::clamp(endpoint_.max_in_flight, 1, 64)) {
  split_url(endpoint_.url);
}

Json JsonTransport::post(const Json& body) {
  SplitUrl url = split_url(endpoint_.url);
  std::string payload = body.dump();
  std::string last_error;
  bool retryable = true;
  for (int attempt = 0; attempt <= std::max(0, endpoint_.max_retries); ++attempt) {
    in_flight_.acquire();
    httplib::Result res = [&] {
      httplib::Client client(url.origin);
      auto seconds = endpoint_.timeout_ms / 1000;
      auto micros = (endpoint_.timeout_ms % 1000) * 1000;
      client.set_connection_timeout(seconds, micros);
      client.set_read_timeout(seconds, micros);
      client.set_write_timeout(seconds, micros);
      httplib::Headers headers;
      if (!endpoint_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
      return client.Post(url.path, headers, payload, "application/json");
    }();
    in_flight_.release();

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      try {
        return Json::parse(res->body);
      } catch (const Json::parse_error&) {
        throw Error(ErrorCode::Provider, "provider reply is not JSON");
      }
    }
    last_error = "HTTP status " + std::to_string(res->status);
    if (res->status < 500 && res->status != 429) {
      retryable = false;
      break;
    }
  }
  throw Error(ErrorCode::Provider, endpoint_.url + ": " + last_error, retryable);
}

ExternalEmbedder::ExternalEmbedder(HttpEndpoint endpoint) : transport_(std::move(endpoint)) {}

Embedding ExternalEmbedder::request(std::string_view input) {
  Json reply = transport_.post({{"model", transport_.endpoint().model}, {"input", input}});
  if (!reply.is_object() || !reply.contains("vector") || !reply["vector"].is_array())
    throw Error(ErrorCode::Provider, "embedding reply lacks a 'vector' array");
  std::vector<double> raw;
  try {
    raw = reply["vector"].get<std::vector<double>>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::Provider, "embedding vector holds non-numeric values");
  }
  std::size_t expected = 0;
  if (!dimension_.compare_exchange_strong(expected, raw.size()) && expected != raw.size())
    throw Error(ErrorCode::DimensionMismatch,
                "provider returned dimension " + std::to_string(raw.size()) + ", expected " +
                    std::to_string(expected));
  return normalize(raw);
}

Embedding ExternalEmbedder::embed_actions(std::span<const std::string> actions) {
  std::string joined;
  for (const std::string& a : actions) {
    if (!joined.empty()) joined += ' ';
    joined += a;
  }
  return request(joined);
}

Embedding ExternalEmbedder::embed_text(std::string_view text) { return request(text); }

std::string ExternalReasoner::complete(const std::string& prompt) {
  Json reply = transport_.post({{"model", transport_.endpoint().model}, {"input", prompt}});
  if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string())
    throw Error(ErrorCode::Provider, "reasoning reply lacks a 'text' string");
  return reply["text"].get<std::string>();
}

MapperReply ExternalSemanticMapper::map(std::span<const std::string> taxonomy_actions,
                                        std::span<const MapperSlice> slices) {
  Json jslices = Json::array();
  for (const MapperSlice& s : slices)
    jslices.push_back({{"file", s.file}, {"line_start", s.line_start}, {"text", s.text}});
  Json body = {{"taxonomy_actions", Json(std::vector<std::string>(taxonomy_actions.begin(),
                                                                  taxonomy_actions.end()))},
               {"slices", std::move(jslices)}};
  if (!transport_.endpoint().model.empty()) body["model"] = transport_.endpoint().model;
  Json reply = transport_.post(body);
  MapperReply out;
  try {
    out.actions = reply.at("actions").get<std::vector<std::string>>();
    out.order_confidence = reply.value("order_confidence", 0.0);
  } catch (const Json::exception&) {
    throw Error(ErrorCode::Provider, "mapper reply lacks an 'actions' string array");
  }
  return out;
}

namespace {

HttpEndpoint resolve_endpoint(const ProviderSettings& s, const std::string& explicit_url,
                              const std::string& model, std::string_view suffix,
                              std::string_view what) {
  HttpEndpoint ep;
  ep.url = explicit_url;
  if (ep.url.empty()) {
    if (const char* base = std::getenv("SEQGUARD_PROVIDER_URL"); base && *base) {
      ep.url = base;
      while (!ep.url.empty() && ep.url.back() == '/') ep.url.pop_back();
      ep.url += suffix;
    }
  }
  if (ep.url.empty())
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " provider is external but no endpoint is configured");
  ep.model = model;
  if (const char* key = std::getenv(s.key_env.c_str())) ep.api_key = key;
  ep.timeout_ms = s.timeout_ms;
  ep.max_retries = s.max_retries;
  ep.max_in_flight = s.max_in_flight;
  return ep;
}

}  // namespace

Providers make_providers(const ProviderSettings& s) {
  Providers p;
  if (s.embedder == "offline")
    p.embedder = std::make_shared<OfflineHashEmbedder>();
  else if (s.embedder == "external")
    p.embedder = std::make_shared<ExternalEmbedder>(
        resolve_endpoint(s, s.embedding_endpoint, s.embedding_model, "/v1/embed", "embedding"));
  else
    throw Error(ErrorCode::InvalidArgument, "unknown embedder '" + s.embedder + "'");

  if (s.reasoner == "external")
    p.reasoner = std::make_shared<ExternalReasoner>(
        resolve_endpoint(s, s.reasoning_endpoint, s.reasoning_model, "/v1/reason", "reasoning"));
  else if (s.reasoner != "offline")
    throw Error(ErrorCode::InvalidArgument, "unknown reasoner '" + s.reasoner + "'");

  if (s.mapper == "external")
    p.mapper = std::make_shared<ExternalSemanticMapper>(
        resolve_endpoint(s, s.mapper_endpoint, s.mapper_model, "/v1/map", "mapper"));
  else if (s.mapper != "rules")
    throw Error(ErrorCode::InvalidArgument, "unknown mapper '" + s.mapper + "'");
  return p;
}

}  // namespace seqguard
