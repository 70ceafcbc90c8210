// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

/// Unit-norm embedding. Everything stored or searched goes through
/// make_unit_vector, so cosine similarity reduces to a dot product.
struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Throws ZeroVector for an all-zero (or empty) input.
std::vector<double> l2_normalize(std::span<const double> values);

/// l2_normalize followed by narrowing to float. Inputs that are already
/// unit-norm to within float rounding pass through unchanged, which keeps
/// vectors bit-stable across a JSON round trip.
EmbeddingVector make_unit_vector(std::span<const double> values);

/// Lowercased runs of ASCII alphanumerics (bytes >= 0x80 count as word
/// characters so non-Latin scripts still tokenize).
std::vector<std::string> hash_tokens(std::string_view text);

/// Deterministic signed feature hashing with FNV-1a: each token adds +/-1
/// to bucket h mod dim (sign from the top bit of h). Throws NoTokens.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim = 64);

struct EmbeddingProviderConfig {
  std::string endpoint_url;
  std::string model_name = "text-embedding-3-small";
  std::size_t batch_size = 64;
  int timeout_ms = 30000;
  std::string api_key_env = "EMBED_API_KEY";
};

/// Calls an embeddings endpoint (`{"model","input":[...]}` ->
/// `{"data":[{"index","embedding"}]}`) in batches of `batch_size`.
/// Output order matches input order.
std::vector<EmbeddingVector> embed_texts(const EmbeddingProviderConfig& config,
                                         std::span<const std::string> texts);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
  virtual std::string name() const = 0;

  EmbeddingVector embed_one(const std::string& text);
};

class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 64);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string name() const override;
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_;
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbeddingProviderConfig config);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::string name() const override;

 private:
  EmbeddingProviderConfig config_;
};

/// RemoteEmbedder when `endpoint_url` is non-empty, HashEmbedder otherwise.
std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderConfig& config);

}  // namespace ragkit
