// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ragkit/error.hpp"
#include "ragkit/mock_server.hpp"
#include "ragkit/retrieval.hpp"
#include "ragkit/web_tools.hpp"

namespace {

using namespace ragkit;

class CountingEmbedder final : public Embedder {
 public:
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    ++calls;
    texts_seen += texts.size();
    return inner_.embed(texts);
  }
  std::string name() const override { return "counting"; }

  std::size_t calls = 0;
  std::size_t texts_seen = 0;

 private:
  HashEmbedder inner_;
};

class MapResolver final : public SourceResolver {
 public:
  std::shared_ptr<const Collection> resolve(const KnowledgeSource& source, Embedder&) override {
    if (const auto* p = std::get_if<source::Preindexed>(&source)) {
      const auto it = collections.find(p->collection);
      if (it != collections.end()) return it->second;
    }
    fail(ErrorCode::SourceUnavailable, "no such source");
  }
  std::map<std::string, std::shared_ptr<const Collection>> collections;
};

std::vector<Chunk> three_doc_chunks() {
  std::vector<Chunk> out;
  for (const auto& [name, text] : fixture::three_docs()) {
    Document d;
    d.id = d.source_uri = name;
    d.text = text;
    for (auto& c : chunk_document(d, ChunkingParams{})) out.push_back(std::move(c));
  }
  return out;
}

class Retrieval : public ::testing::Test {
 protected:
  void SetUp() override {
    HashEmbedder e;
    resolver_.collections["fixture"] = build_collection("fixture", three_doc_chunks(), e);
  }
  MapResolver resolver_;
  CountingEmbedder embedder_;
};

TEST_F(Retrieval, ThreeDocTopKMatchesExhaustiveScoring) {
  const std::string query = "knead the dough before baking";
  RetrievalParams p;
  p.mode = RetrievalMode::TopK;
  p.k = 2;
  const auto got = retrieve(query, source::Preindexed{"fixture"}, p, embedder_, resolver_);

  // Oracle: embed every document independently and rank by cosine.
  std::vector<oracle::Vec> docs;
  for (const auto& [name, text] : fixture::three_docs()) docs.push_back(oracle::hash_embed(text, 64));
  const auto q = oracle::hash_embed(query, 64);
  const auto order = oracle::top_k(docs, q, 2);
  ASSERT_EQ(order, (std::vector<std::uint32_t>{0, 1}));  // frozen: baking, then rivers
  EXPECT_NEAR(oracle::cosine(docs[0], q), 0.59761429, 1e-8);
  EXPECT_NEAR(oracle::cosine(docs[1], q), 0.09325048, 1e-8);

  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].rank, 0u);
  EXPECT_EQ(got[1].rank, 1u);
  EXPECT_GE(got[0].score, got[1].score);
  EXPECT_EQ(got[0].source_uri, fixture::three_docs()[order[0]].first);
  EXPECT_EQ(got[1].source_uri, fixture::three_docs()[order[1]].first);
  EXPECT_EQ(got[0].score, oracle::cosine(docs[order[0]], q));
}

TEST_F(Retrieval, QueryEmbeddedExactlyOnce) {
  RetrievalParams p;
  retrieve("solar panels", source::Preindexed{"fixture"}, p, embedder_, resolver_);
  EXPECT_EQ(embedder_.calls, 1u);
  EXPECT_EQ(embedder_.texts_seen, 1u);
}

TEST_F(Retrieval, MinScoreOfOneDropsImperfectHits) {
  RetrievalParams p;
  p.min_score = 1.0;
  EXPECT_TRUE(retrieve("bread", source::Preindexed{"fixture"}, p, embedder_, resolver_).empty());
}

TEST_F(Retrieval, MissingSourceIsUnavailable) {
  try {
    retrieve("x", source::Preindexed{"nope"}, RetrievalParams{}, embedder_, resolver_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SourceUnavailable);
  }
}

TEST_F(Retrieval, ParamsAreValidated) {
  RetrievalParams p;
  p.lambda = 2.0;
  EXPECT_THROW(p.validate(), Error);
  p.lambda = 0.5;
  p.k = 3;
  p.fetch_k = 2;
  EXPECT_THROW(p.validate(), Error);
  p.fetch_k = 0;
  p.min_score = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p.min_score = -1.0;
  p.k = 0;
  EXPECT_NO_THROW(p.validate());
}

TEST(RetrievalMmr, DuplicateDocumentsYieldDiversePair) {
  const std::vector<std::string> texts = {"bread yeast dough", "bread yeast dough",
                                          "bread oven crust"};
  HashEmbedder e;
  std::vector<Chunk> chunks;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Chunk c;
    c.text = texts[i];
    c.metadata["source_uri"] = "d" + std::to_string(i + 1);
    chunks.push_back(c);
  }
  const auto c = build_collection("dup", chunks, e);
  RetrievalParams p;
  p.k = 2;
  p.lambda = 0.3;
  const auto got = retrieve_from("bread yeast", *c, p, e);

  std::vector<oracle::Vec> vs;
  for (const auto& t : texts) vs.push_back(oracle::hash_embed(t, 64));
  const auto want = oracle::brute_force_mmr(vs, oracle::hash_embed("bread yeast", 64), 2, 20, 0.3);
  ASSERT_EQ(want.size(), 2u);
  EXPECT_EQ(want[0].id, 0u);
  EXPECT_EQ(want[1].id, 2u);  // frozen: the non-duplicate

  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].source_uri, "d1");
  EXPECT_EQ(got[1].source_uri, "d3");

  p.mode = RetrievalMode::TopK;
  const auto top = retrieve_from("bread yeast", *c, p, e);
  EXPECT_EQ(top[1].source_uri, "d2");
}

TEST(RetrievalProperty, NeverMoreThanKNorBelowMinScore) {
  HashEmbedder e;
  const auto c = build_collection("fixture", three_doc_chunks(), e);
  for (std::size_t k = 1; k <= 5; ++k) {
    for (double min_score : {-1.0, 0.0, 0.05, 0.2, 0.5}) {
      for (auto mode : {RetrievalMode::TopK, RetrievalMode::Mmr}) {
        RetrievalParams p;
        p.k = k;
        p.min_score = min_score;
        p.mode = mode;
        const auto got = retrieve_from("rivers and solar bread", *c, p, e);
        ASSERT_LE(got.size(), k);
        for (std::size_t i = 0; i < got.size(); ++i) {
          ASSERT_GE(got[i].score, min_score);
          ASSERT_EQ(got[i].rank, i);
        }
      }
    }
  }
}

TEST(IndexChunks, SkipsChunksWithoutTokens) {
  HashEmbedder e;
  std::vector<Chunk> chunks(3);
  chunks[0].text = "real words";
  chunks[1].text = "--- ... !!!";
  chunks[2].text = "more words";
  Collection c("c", 64);
  EXPECT_EQ(index_chunks(c, chunks, e), 2u);
  EXPECT_EQ(build_collection("none", {chunks[1]}, e), nullptr);
}

class WebCorpus : public ::testing::Test {
 protected:
  void SetUp() override {
    mock_ = MockServer::start();
    search_ = std::make_unique<HttpSearchProvider>(mock_->search_url());
  }
  void serve(const std::string& path, const std::string& body) {
    mock_->set_page(path, MockPage{200, "text/html", body, ""});
  }
  std::unique_ptr<MockServer> mock_;
  std::unique_ptr<HttpSearchProvider> search_;
  HashEmbedder embedder_;
};

TEST_F(WebCorpus, TwoPagesBothIndexed) {
  const std::string a = "<title>A</title><p>Glaciers carve valleys slowly.</p>";
  const std::string b = "<title>B</title><p>Volcanoes build islands from lava.</p>";
  serve("/a", a);
  serve("/b", b);
  mock_->set_search_results({{"A", mock_->page_url("/a"), "", SearchCategory::Text},
                             {"B", mock_->page_url("/b"), "", SearchCategory::Text}});
  // Each stripped page is far below the default chunk size: one chunk apiece.
  ASSERT_LT(oracle::codepoints(oracle::strip_html(a)), ChunkingParams{}.chunk_size);
  ASSERT_LT(oracle::codepoints(oracle::strip_html(b)), ChunkingParams{}.chunk_size);

  const auto c = build_web_corpus("geology", *search_, WebCorpusOptions{}, embedder_);
  ASSERT_EQ(c->size(), 2u);
  EXPECT_EQ(c->records()[0].metadata.at("url"), mock_->page_url("/a"));
  EXPECT_EQ(c->records()[1].metadata.at("url"), mock_->page_url("/b"));
  EXPECT_EQ(c->records()[0].text, oracle::strip_html("<p>Glaciers carve valleys slowly.</p>"));
}

TEST_F(WebCorpus, FailuresSkippedOrderKept) {
  serve("/ok", "<p>Only this page works.</p>");
  mock_->set_page("/gone", MockPage{404, "text/html", "missing", ""});
  mock_->set_search_results({{"gone", mock_->page_url("/gone"), "", SearchCategory::Text},
                             {"ok", mock_->page_url("/ok"), "", SearchCategory::Text}});
  const auto c = build_web_corpus("q", *search_, WebCorpusOptions{}, embedder_);
  ASSERT_EQ(c->size(), 1u);
  EXPECT_EQ(c->records()[0].metadata.at("url"), mock_->page_url("/ok"));
}

TEST_F(WebCorpus, UnavailableCases) {
  auto code = [&](const WebCorpusOptions& o) {
    try {
      build_web_corpus("q", *search_, o, embedder_);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  mock_->set_page("/gone", MockPage{500, "text/html", "", ""});
  mock_->set_search_results({{"gone", mock_->page_url("/gone"), "", SearchCategory::Text}});
  EXPECT_EQ(code(WebCorpusOptions{}), ErrorCode::SourceUnavailable);
  WebCorpusOptions none;
  none.max_pages = 0;
  EXPECT_EQ(code(none), ErrorCode::SourceUnavailable);
  mock_->set_search_results({});
  EXPECT_EQ(code(WebCorpusOptions{}), ErrorCode::SourceUnavailable);
}

}  // namespace
