// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "ragkit/corpus_ingest.hpp"
#include "ragkit/embedding.hpp"
#include "ragkit/llm_gateway.hpp"
#include "ragkit/retrieval.hpp"
#include "ragkit/vector_store.hpp"

namespace fixture {

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("ragkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
           std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<std::pair<std::string, std::string>>& three_docs() {
  static const std::vector<std::pair<std::string, std::string>> docs = {
      {"baking.txt",
       "Bread rises because yeast ferments sugar and releases carbon dioxide. Knead the dough "
       "to develop gluten before baking."},
      {"rivers.txt",
       "Rivers carry sediment from mountains down to the sea. Floodplains form where a river "
       "overflows its banks."},
      {"solar.txt",
       "Solar panels convert sunlight into electricity with photovoltaic cells. Panel "
       "efficiency drops as temperature rises."},
  };
  return docs;
}

void write_three_docs(const std::filesystem::path& dir) {
  for (const auto& [name, text] : three_docs()) write_file(dir / name, text);
}

std::size_t build_preindexed(const std::filesystem::path& root, const std::string& name) {
  TempDir docs;
  write_three_docs(docs.path());
  const std::vector<std::filesystem::path> paths = {docs.path()};
  const auto ingest = ragkit::ingest_paths(paths, ragkit::ChunkingParams{});
  ragkit::HashEmbedder embedder;
  const auto collection = ragkit::build_collection(name, ingest.chunks, embedder);
  ragkit::persist(*collection, root / name);
  return collection->size();
}

ragkit::ServiceConfig service_config(const ragkit::MockServer& mock,
                                     const std::filesystem::path& preindexed) {
  ragkit::ServiceConfig cfg;
  cfg.llm_endpoint = mock.llm_url();
  cfg.search_endpoint = mock.search_url();
  cfg.image_gen_endpoint = mock.image_generate_url();
  cfg.image_understand_endpoint = mock.image_understand_url();
  cfg.asr_endpoint = mock.asr_url();
  cfg.llm_retries = 0;
  if (!preindexed.empty()) cfg.preindexed_dir = preindexed;
  return cfg;
}

std::string last_user_content(const std::string& request_body) {
  const auto doc = nlohmann::json::parse(request_body);
  std::string out;
  for (const auto& m : doc.at("messages")) {
    if (m.at("role") == "user") out = m.at("content").get<std::string>();
  }
  return out;
}

std::string context_block(const std::string& request_body) {
  const auto doc = nlohmann::json::parse(request_body);
  for (const auto& m : doc.at("messages")) {
    const auto content = m.at("content").get<std::string>();
    if (m.at("role") == "system" && content.rfind(ragkit::kContextHeader, 0) == 0) {
      return content;
    }
  }
  return {};
}

}  // namespace fixture
