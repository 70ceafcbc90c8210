// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ragkit/corpus_ingest.hpp"
#include "ragkit/embedding.hpp"

namespace ragkit {

using RecordId = std::uint32_t;

struct VectorRecord {
  RecordId id = 0;
  std::string text;
  Metadata metadata;
  EmbeddingVector vector;

  friend bool operator==(const VectorRecord&, const VectorRecord&) = default;
};

struct RecordInput {
  std::string text;
  Metadata metadata;
  EmbeddingVector vector;
};

struct SearchHit {
  RecordId id = 0;
  double score = 0.0;  // cosine(query, record)
  std::string text;
  Metadata metadata;
};

/// Flat cosine collection. Records are append-only and ids are assigned
/// from a monotonic counter, never reused. Not internally synchronized:
/// callers provide the many-readers/one-writer discipline.
class Collection {
 public:
  Collection(std::string name, std::size_t dim);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  RecordId next_id() const noexcept { return next_id_; }
  const std::vector<VectorRecord>& records() const noexcept { return records_; }

  /// Appends in input order. All-or-nothing: throws DimMismatch (or
  /// InvalidArgument for a non-unit vector) before touching the records.
  std::vector<RecordId> add_records(std::vector<RecordInput> items);

  friend bool operator==(const Collection&, const Collection&) = default;

 private:
  friend Collection load_collection(const std::filesystem::path& dir);

  std::string name_;
  std::size_t dim_;
  std::vector<VectorRecord> records_;
  RecordId next_id_ = 0;
};

/// Dot product of two unit vectors, accumulated in double and clamped to
/// [-1, 1]. Throws DimMismatch.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Exhaustive scan; score descending, ties by ascending id.
std::vector<SearchHit> search_top_k(const Collection& c, const EmbeddingVector& query,
                                    std::size_t k);

/// Widening heuristic used when the caller leaves fetch_k unset.
constexpr std::size_t default_fetch_k(std::size_t k) noexcept {
  return 4 * k > 20 ? 4 * k : 20;
}

struct MmrPick {
  std::size_t candidate = 0;  // index into the candidate pool
  double objective = 0.0;     // value of the selection objective when picked
};

/// Greedy maximal marginal relevance over a candidate pool. The first pick
/// maximizes relevance; every later pick maximizes
///   lambda * relevance[d] - (1 - lambda) * max_{s selected} similarity(d, s).
/// Ties go to the smaller id. The first pick's objective is reported as
/// lambda * relevance (the redundancy term over an empty set is 0).
std::vector<MmrPick> mmr_select(std::span<const double> relevance,
                                std::span<const RecordId> ids,
                                const std::function<double(std::size_t, std::size_t)>& similarity,
                                std::size_t k, double lambda);

struct MmrResult {
  std::vector<SearchHit> hits;    // selection order, score = cosine to query
  std::vector<double> objectives; // objective value at each selection step
};

/// Pool = search_top_k(fetch_k), then mmr_select. Throws InvalidLambda for
/// lambda outside [0, 1], InvalidArgument when fetch_k < k.
MmrResult search_mmr_detailed(const Collection& c, const EmbeddingVector& query,
                              std::size_t k, std::size_t fetch_k, double lambda);

std::vector<SearchHit> search_mmr(const Collection& c, const EmbeddingVector& query,
                                  std::size_t k, std::size_t fetch_k, double lambda);

inline constexpr std::uint32_t kStoreVersion = 1;

/// Writes `<dir>/manifest.json` and `<dir>/records.bin`, replacing any
/// previous contents through rename.
void persist(const Collection& c, const std::filesystem::path& dir);

/// Throws Io when files cannot be read and CorruptStore for any malformed
/// content; never returns a partially loaded collection.
Collection load_collection(const std::filesystem::path& dir);

/// Removes the directory tree. Missing directories are not an error.
void delete_collection(const std::filesystem::path& dir);

}  // namespace ragkit
