// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/embedding.hpp"

#include <cctype>
#include <cmath>

#include "http_util.hpp"
#include "json.hpp"
#include "ragkit/error.hpp"
#include "ragkit/text.hpp"

namespace ragkit {

using nlohmann::json;

std::vector<double> l2_normalize(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    fail(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  }
  const double norm = std::sqrt(sum);
  std::vector<double> out(values.begin(), values.end());
  for (auto& v : out) v /= norm;
  return out;
}

EmbeddingVector make_unit_vector(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  EmbeddingVector out;
  out.values.reserve(values.size());
  if (sum > 0.0 && std::abs(std::sqrt(sum) - 1.0) <= 1e-7) {
    for (double v : values) out.values.push_back(static_cast<float>(v));
    return out;
  }
  for (double v : l2_normalize(values)) out.values.push_back(static_cast<float>(v));
  return out;
}

std::vector<std::string> hash_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
  if (dim == 0) fail(ErrorCode::InvalidArgument, "dim must be positive");
  const auto tokens = hash_tokens(text);
  if (tokens.empty()) fail(ErrorCode::NoTokens, "text has no alphanumeric tokens");
  std::vector<double> acc(dim, 0.0);
  for (const auto& token : tokens) {
    const auto h = fnv1a64(token);
    const auto index = static_cast<std::size_t>(h % dim);
    acc[index] += (h >> 63) == 0 ? 1.0 : -1.0;
  }
  // Opposite-signed collisions can cancel to zero.
  return make_unit_vector(acc);
}

namespace {

std::vector<EmbeddingVector> parse_embeddings(const std::string& body,
                                              std::size_t expected) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorCode::ProtocolError, std::string("embeddings response: ") + e.what());
  }
  if (!doc.contains("data") || !doc["data"].is_array() || doc["data"].size() != expected) {
    fail(ErrorCode::ProtocolError, "embeddings response has wrong data length");
  }
  std::vector<EmbeddingVector> out(expected);
  std::vector<bool> seen(expected, false);
  std::size_t position = 0;
  for (const auto& item : doc["data"]) {
    const auto index = item.contains("index") ? item["index"].get<std::size_t>() : position;
    ++position;
    if (index >= expected || seen[index]) {
      fail(ErrorCode::ProtocolError, "embeddings response has bad index");
    }
    const auto raw = item.at("embedding").get<std::vector<double>>();
    out[index] = make_unit_vector(raw);
    seen[index] = true;
  }
  return out;
}

}  // namespace

std::vector<EmbeddingVector> embed_texts(const EmbeddingProviderConfig& config,
                                         std::span<const std::string> texts) {
  if (texts.empty()) fail(ErrorCode::EmptyInput, "no texts to embed");
  for (const auto& t : texts) {
    if (t.empty()) fail(ErrorCode::EmptyInput, "cannot embed an empty text");
  }
  if (config.batch_size < 1) fail(ErrorCode::InvalidArgument, "batch_size must be >= 1");

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += config.batch_size) {
    const auto batch = texts.subspan(begin, std::min(config.batch_size, texts.size() - begin));
    json body = {{"model", config.model_name},
                 {"input", std::vector<std::string>(batch.begin(), batch.end())}};
    http::Request req;
    req.method = "POST";
    req.url = config.endpoint_url;
    req.body = body.dump();
    req.content_type = "application/json";
    req.timeout_ms = config.timeout_ms;
    http::add_bearer_from_env(req.headers, config.api_key_env);
    const auto res = http::send(req);
    if (!res.ok()) {
      fail(ErrorCode::ProviderUnreachable,
           config.endpoint_url + ": " + res.transport_message);
    }
    if (res.status < 200 || res.status >= 300) {
      fail(ErrorCode::ProviderError,
           "embeddings endpoint returned " + std::to_string(res.status) + ": " + res.body,
           res.status);
    }
    auto vectors = parse_embeddings(res.body, batch.size());
    std::move(vectors.begin(), vectors.end(), std::back_inserter(out));
  }
  return out;
}

EmbeddingVector Embedder::embed_one(const std::string& text) {
  auto out = embed(std::span<const std::string>(&text, 1));
  return std::move(out.front());
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) fail(ErrorCode::InvalidArgument, "dim must be positive");
}

std::vector<EmbeddingVector> HashEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) fail(ErrorCode::EmptyInput, "no texts to embed");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t, dim_));
  return out;
}

std::string HashEmbedder::name() const { return "hash-" + std::to_string(dim_); }

RemoteEmbedder::RemoteEmbedder(EmbeddingProviderConfig config) : config_(std::move(config)) {}

std::vector<EmbeddingVector> RemoteEmbedder::embed(std::span<const std::string> texts) {
  return embed_texts(config_, texts);
}

std::string RemoteEmbedder::name() const { return config_.model_name; }

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderConfig& config) {
  if (config.endpoint_url.empty()) return std::make_unique<HashEmbedder>();
  return std::make_unique<RemoteEmbedder>(config);
}

}  // namespace ragkit
