// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ragkit/config.hpp"
#include "ragkit/mock_server.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Three short documents with disjoint vocabularies: (filename, text).
const std::vector<std::pair<std::string, std::string>>& three_docs();

/// Writes three_docs() into `dir`.
void write_three_docs(const std::filesystem::path& dir);

/// Ingests three_docs() with default chunking, embeds them with the local
/// hash embedder and persists the collection to `root/name`. Returns the
/// number of records.
std::size_t build_preindexed(const std::filesystem::path& root, const std::string& name);

/// Service configuration pointing every endpoint at `mock`, with local
/// hash embeddings and the preindexed directory at `preindexed`.
ragkit::ServiceConfig service_config(const ragkit::MockServer& mock,
                                     const std::filesystem::path& preindexed = {});

/// Text of the last "user" message in a chat-completions request body.
std::string last_user_content(const std::string& request_body);

/// The content of the context system message, or "" if absent.
std::string context_block(const std::string& request_body);

}  // namespace fixture
