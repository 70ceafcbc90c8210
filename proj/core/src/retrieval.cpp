// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/retrieval.hpp"

#include <future>

#include "ragkit/error.hpp"
#include "ragkit/web_tools.hpp"

namespace ragkit {

void RetrievalParams::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::InvalidLambda, "lambda must lie in [0, 1]");
  }
  if (effective_fetch_k() < k) fail(ErrorCode::InvalidArgument, "fetch_k must be >= k");
  if (!(min_score >= -1.0 && min_score <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "min_score must lie in [-1, 1]");
  }
}

namespace {

std::string source_of(const Metadata& metadata) {
  if (auto it = metadata.find("source_uri"); it != metadata.end()) return it->second;
  if (auto it = metadata.find("url"); it != metadata.end()) return it->second;
  return {};
}

}  // namespace

std::vector<ContextSnippet> retrieve_from(const std::string& query, const Collection& collection,
                                          const RetrievalParams& params, Embedder& embedder) {
  if (query.empty()) fail(ErrorCode::EmptyInput, "query is empty");
  params.validate();
  const auto q = embedder.embed_one(query);
  const auto hits = params.mode == RetrievalMode::TopK
                        ? search_top_k(collection, q, params.k)
                        : search_mmr(collection, q, params.k, params.effective_fetch_k(),
                                     params.lambda);
  std::vector<ContextSnippet> out;
  for (const auto& hit : hits) {
    if (hit.score < params.min_score) continue;
    out.push_back({hit.text, source_of(hit.metadata), hit.score, out.size()});
  }
  return out;
}

std::vector<ContextSnippet> retrieve(const std::string& query, const KnowledgeSource& source,
                                     const RetrievalParams& params, Embedder& embedder,
                                     SourceResolver& resolver) {
  if (query.empty()) fail(ErrorCode::EmptyInput, "query is empty");
  params.validate();
  const auto collection = resolver.resolve(source, embedder);
  if (!collection) fail(ErrorCode::SourceUnavailable, "knowledge source has no collection");
  return retrieve_from(query, *collection, params, embedder);
}

namespace {

// Chunks with at least one hashable token, embedded in order.
std::vector<RecordInput> embed_chunks(const std::vector<Chunk>& chunks, Embedder& embedder) {
  std::vector<const Chunk*> usable;
  std::vector<std::string> texts;
  for (const auto& chunk : chunks) {
    if (hash_tokens(chunk.text).empty()) continue;
    usable.push_back(&chunk);
    texts.push_back(chunk.text);
  }
  std::vector<RecordInput> items;
  if (texts.empty()) return items;
  auto vectors = embedder.embed(texts);
  items.reserve(usable.size());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    items.push_back({usable[i]->text, usable[i]->metadata, std::move(vectors[i])});
  }
  return items;
}

}  // namespace

std::size_t index_chunks(Collection& collection, const std::vector<Chunk>& chunks,
                         Embedder& embedder) {
  return collection.add_records(embed_chunks(chunks, embedder)).size();
}

std::unique_ptr<Collection> build_collection(std::string name, const std::vector<Chunk>& chunks,
                                             Embedder& embedder) {
  auto items = embed_chunks(chunks, embedder);
  if (items.empty()) return nullptr;
  auto collection = std::make_unique<Collection>(std::move(name), items.front().vector.dim());
  collection->add_records(std::move(items));
  return collection;
}

std::shared_ptr<const Collection> build_web_corpus(const std::string& query,
                                                   SearchProvider& search,
                                                   const WebCorpusOptions& options,
                                                   Embedder& embedder) {
  if (options.max_pages == 0) fail(ErrorCode::SourceUnavailable, "max_pages is 0");
  std::vector<SearchResult> results;
  try {
    results = web_search(search, query, SearchCategory::Text, options.max_pages);
  } catch (const Error& e) {
    fail(ErrorCode::SourceUnavailable, std::string("web search failed: ") + e.what(), e.status());
  }
  if (results.empty()) fail(ErrorCode::SourceUnavailable, "web search returned no results");

  FetchOptions fetch;
  fetch.timeout_ms = options.fetch_timeout_ms;
  std::vector<std::future<PageContent>> pending;
  pending.reserve(results.size());
  for (const auto& r : results) {
    pending.push_back(std::async(std::launch::async, [url = r.url, fetch] {
      return fetch_page(url, fetch);
    }));
  }

  std::vector<Chunk> chunks;
  std::size_t fetched = 0;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    PageContent page;
    try {
      page = pending[i].get();
    } catch (const Error&) {
      continue;
    }
    ++fetched;
    Document doc;
    doc.id = results[i].url;
    doc.source_uri = results[i].url;
    doc.text = std::move(page.text);
    doc.metadata["url"] = results[i].url;
    doc.metadata["title"] = page.title.empty() ? results[i].title : page.title;
    auto page_chunks = chunk_document(doc, options.chunking);
    std::move(page_chunks.begin(), page_chunks.end(), std::back_inserter(chunks));
  }
  if (fetched == 0) fail(ErrorCode::SourceUnavailable, "no search result could be fetched");
  auto collection = build_collection("web:" + query, chunks, embedder);
  if (!collection) fail(ErrorCode::SourceUnavailable, "fetched pages contain no indexable text");
  return collection;
}

}  // namespace ragkit
