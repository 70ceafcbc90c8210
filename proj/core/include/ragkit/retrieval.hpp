// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ragkit/corpus_ingest.hpp"
#include "ragkit/embedding.hpp"
#include "ragkit/vector_store.hpp"

namespace ragkit {

class SearchProvider;

namespace source {
struct Preindexed {
  std::string collection;
};
struct SessionUploads {
  std::string session_id;
};
struct WebEphemeral {
  std::string query;
};
}  // namespace source

using KnowledgeSource =
    std::variant<source::Preindexed, source::SessionUploads, source::WebEphemeral>;

enum class RetrievalMode { TopK, Mmr };

struct RetrievalParams {
  RetrievalMode mode = RetrievalMode::Mmr;
  std::size_t k = 4;
  std::size_t fetch_k = 0;  // 0 means default_fetch_k(k)
  double lambda = 0.5;
  double min_score = 0.0;

  std::size_t effective_fetch_k() const noexcept {
    return fetch_k == 0 ? default_fetch_k(k) : fetch_k;
  }
  /// Throws InvalidLambda / InvalidArgument.
  void validate() const;
};

struct ContextSnippet {
  std::string text;
  std::string source_uri;
  double score = 0.0;
  std::size_t rank = 0;
};

/// Maps a knowledge source to the collection that backs it. Implementations
/// throw SourceUnavailable when the source cannot be produced. Returned
/// collections are immutable snapshots.
class SourceResolver {
 public:
  virtual ~SourceResolver() = default;
  virtual std::shared_ptr<const Collection> resolve(const KnowledgeSource& source,
                                                    Embedder& embedder) = 0;
};

/// Embeds the query once, searches the resolved collection, drops hits
/// under min_score and ranks the rest from 0.
std::vector<ContextSnippet> retrieve(const std::string& query, const KnowledgeSource& source,
                                     const RetrievalParams& params, Embedder& embedder,
                                     SourceResolver& resolver);

/// Same, against a collection the caller already holds.
std::vector<ContextSnippet> retrieve_from(const std::string& query, const Collection& collection,
                                          const RetrievalParams& params, Embedder& embedder);

/// Embeds and appends chunks to `collection`. Chunks without any
/// hashable token (pure punctuation/whitespace) are skipped. Returns the
/// number of records added.
std::size_t index_chunks(Collection& collection, const std::vector<Chunk>& chunks,
                         Embedder& embedder);

/// Same, creating the collection with the embedder's output dimension.
/// Returns null if no chunk was indexable.
std::unique_ptr<Collection> build_collection(std::string name, const std::vector<Chunk>& chunks,
                                             Embedder& embedder);

struct WebCorpusOptions {
  std::size_t max_pages = 3;
  ChunkingParams chunking;
  int fetch_timeout_ms = 10000;
};

/// web_search -> fetch_page (concurrently, failures skipped) -> split ->
/// embed into an in-memory collection whose records carry metadata
/// `url`/`source_uri`. Assembly follows search-result order. Throws
/// SourceUnavailable when no page could be fetched.
std::shared_ptr<const Collection> build_web_corpus(const std::string& query,
                                                   SearchProvider& search,
                                                   const WebCorpusOptions& options,
                                                   Embedder& embedder);

}  // namespace ragkit
