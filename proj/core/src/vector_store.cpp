// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

#include "ragkit/vector_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <system_error>

#include "json.hpp"
#include "ragkit/error.hpp"

namespace ragkit {

using nlohmann::json;

namespace {

constexpr double kUnitTolerance = 1e-5;

double norm_of(const EmbeddingVector& v) {
  double sum = 0.0;
  for (float x : v.values) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

}  // namespace

Collection::Collection(std::string name, std::size_t dim) : name_(std::move(name)), dim_(dim) {
  if (dim_ == 0) fail(ErrorCode::InvalidArgument, "collection dim must be positive");
}

std::vector<RecordId> Collection::add_records(std::vector<RecordInput> items) {
  for (const auto& item : items) {
    if (item.vector.dim() != dim_) {
      fail(ErrorCode::DimMismatch, "expected dim " + std::to_string(dim_) + ", got " +
                                       std::to_string(item.vector.dim()));
    }
    if (std::abs(norm_of(item.vector) - 1.0) > kUnitTolerance) {
      fail(ErrorCode::InvalidArgument, "record vectors must be unit-norm");
    }
  }
  if (items.size() > std::numeric_limits<RecordId>::max() - next_id_) {
    fail(ErrorCode::InvalidArgument, "record id space exhausted");
  }
  std::vector<RecordId> ids;
  ids.reserve(items.size());
  records_.reserve(records_.size() + items.size());
  for (auto& item : items) {
    const auto id = next_id_++;
    records_.push_back({id, std::move(item.text), std::move(item.metadata),
                        std::move(item.vector)});
    ids.push_back(id);
  }
  return ids;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::DimMismatch,
         "dims differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += static_cast<double>(a.values[i]) * b.values[i];
  }
  return std::clamp(dot, -1.0, 1.0);
}

namespace {

void check_query(const Collection& c, const EmbeddingVector& query) {
  if (query.dim() != c.dim()) {
    fail(ErrorCode::DimMismatch, "query dim " + std::to_string(query.dim()) +
                                     " != collection dim " + std::to_string(c.dim()));
  }
}

struct Scored {
  std::size_t index;
  double score;
};

std::vector<Scored> ranked(const Collection& c, const EmbeddingVector& query, std::size_t k) {
  const auto& records = c.records();
  std::vector<Scored> scored;
  scored.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    scored.push_back({i, cosine_similarity(query, records[i].vector)});
  }
  const auto keep = std::min(k, scored.size());
  // Records are stored in ascending-id order, so index order is id order.
  const auto better = [](const Scored& x, const Scored& y) {
    return x.score > y.score || (x.score == y.score && x.index < y.index);
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  scored.resize(keep);
  return scored;
}

SearchHit to_hit(const VectorRecord& r, double score) {
  return {r.id, score, r.text, r.metadata};
}

}  // namespace

std::vector<SearchHit> search_top_k(const Collection& c, const EmbeddingVector& query,
                                    std::size_t k) {
  check_query(c, query);
  std::vector<SearchHit> hits;
  for (const auto& s : ranked(c, query, k)) hits.push_back(to_hit(c.records()[s.index], s.score));
  return hits;
}

std::vector<MmrPick> mmr_select(std::span<const double> relevance,
                                std::span<const RecordId> ids,
                                const std::function<double(std::size_t, std::size_t)>& similarity,
                                std::size_t k, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::InvalidLambda, "lambda must lie in [0, 1]");
  }
  const auto n = relevance.size();
  std::vector<MmrPick> picks;
  if (n == 0 || k == 0) return picks;

  std::vector<bool> taken(n, false);
  // Highest similarity to anything selected so far, per candidate.
  std::vector<double> redundancy(n, -std::numeric_limits<double>::infinity());

  const auto target = std::min(k, n);
  while (picks.size() < target) {
    std::size_t best = n;
    double best_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double value = picks.empty()
                               ? relevance[i]
                               : lambda * relevance[i] - (1.0 - lambda) * redundancy[i];
      if (best == n || value > best_value || (value == best_value && ids[i] < ids[best])) {
        best = i;
        best_value = value;
      }
    }
    const double objective = picks.empty() ? lambda * relevance[best] : best_value;
    picks.push_back({best, objective});
    taken[best] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) redundancy[i] = std::max(redundancy[i], similarity(i, best));
    }
  }
  return picks;
}

MmrResult search_mmr_detailed(const Collection& c, const EmbeddingVector& query,
                              std::size_t k, std::size_t fetch_k, double lambda) {
  check_query(c, query);
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::InvalidLambda, "lambda must lie in [0, 1]");
  }
  if (fetch_k < k) fail(ErrorCode::InvalidArgument, "fetch_k must be >= k");

  const auto pool = ranked(c, query, fetch_k);
  std::vector<double> relevance;
  std::vector<RecordId> ids;
  for (const auto& s : pool) {
    relevance.push_back(s.score);
    ids.push_back(c.records()[s.index].id);
  }
  const auto& records = c.records();
  const auto similarity = [&](std::size_t a, std::size_t b) {
    return cosine_similarity(records[pool[a].index].vector, records[pool[b].index].vector);
  };

  MmrResult result;
  for (const auto& pick : mmr_select(relevance, ids, similarity, k, lambda)) {
    const auto& s = pool[pick.candidate];
    result.hits.push_back(to_hit(records[s.index], s.score));
    result.objectives.push_back(pick.objective);
  }
  return result;
}

std::vector<SearchHit> search_mmr(const Collection& c, const EmbeddingVector& query,
                                  std::size_t k, std::size_t fetch_k, double lambda) {
  return search_mmr_detailed(c, query, k, fetch_k, lambda).hits;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 4> kMagic = {'R', 'A', 'G', 'V'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail(ErrorCode::CorruptStore, "records.bin is truncated");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::Io, "read failed for " + path.string());
  return data;
}

void write_all(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

void persist(const Collection& c, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  std::string records;
  records.append(kMagic.data(), kMagic.size());
  put_u32(records, kStoreVersion);
  for (const auto& r : c.records()) {
    put_u32(records, r.id);
    put_u32(records, static_cast<std::uint32_t>(r.text.size()));
    records.append(r.text);
    const auto meta = json(r.metadata).dump();
    put_u32(records, static_cast<std::uint32_t>(meta.size()));
    records.append(meta);
    for (float x : r.vector.values) put_u32(records, std::bit_cast<std::uint32_t>(x));
  }
  const json manifest = {{"name", c.name()},
                         {"dim", c.dim()},
                         {"count", c.size()},
                         {"metric", "cosine"},
                         {"version", kStoreVersion},
                         {"next_id", c.next_id()}};

  const auto records_tmp = dir / "records.bin.tmp";
  const auto manifest_tmp = dir / "manifest.json.tmp";
  write_all(records_tmp, records);
  write_all(manifest_tmp, manifest.dump(2) + "\n");
  std::filesystem::rename(records_tmp, dir / "records.bin", ec);
  if (!ec) std::filesystem::rename(manifest_tmp, dir / "manifest.json", ec);
  if (ec) fail(ErrorCode::Io, "cannot finalize store in " + dir.string() + ": " + ec.message());
}

Collection load_collection(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    fail(ErrorCode::Io, "no collection at " + dir.string());
  }
  const auto manifest_text = read_all(dir / "manifest.json");
  const auto data = read_all(dir / "records.bin");

  std::string name;
  std::size_t dim = 0;
  std::size_t count = 0;
  RecordId next_id = 0;
  try {
    const auto manifest = json::parse(manifest_text);
    if (manifest.at("version").get<std::uint32_t>() != kStoreVersion) {
      fail(ErrorCode::CorruptStore,
           "unsupported store version " + manifest.at("version").dump());
    }
    if (manifest.at("metric").get<std::string>() != "cosine") {
      fail(ErrorCode::CorruptStore, "unsupported metric");
    }
    name = manifest.at("name").get<std::string>();
    dim = manifest.at("dim").get<std::size_t>();
    count = manifest.at("count").get<std::size_t>();
    next_id = manifest.at("next_id").get<RecordId>();
  } catch (const json::exception& e) {
    fail(ErrorCode::CorruptStore, std::string("bad manifest: ") + e.what());
  }
  if (dim == 0) fail(ErrorCode::CorruptStore, "manifest dim must be positive");

  Reader reader(data);
  const auto magic = reader.bytes(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    fail(ErrorCode::CorruptStore, "bad magic in records.bin");
  }
  if (const auto version = reader.u32(); version != kStoreVersion) {
    fail(ErrorCode::CorruptStore, "unsupported records.bin version " + std::to_string(version));
  }

  Collection c(name, dim);
  c.records_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    VectorRecord r;
    r.id = reader.u32();
    if (!c.records_.empty() && r.id <= c.records_.back().id) {
      fail(ErrorCode::CorruptStore, "record ids are not strictly increasing");
    }
    if (r.id >= next_id) fail(ErrorCode::CorruptStore, "record id beyond next_id");
    r.text = std::string(reader.bytes(reader.u32()));
    const auto meta = reader.bytes(reader.u32());
    try {
      r.metadata = json::parse(meta).get<Metadata>();
    } catch (const json::exception& e) {
      fail(ErrorCode::CorruptStore, std::string("bad record metadata: ") + e.what());
    }
    r.vector.values.resize(dim);
    for (auto& x : r.vector.values) x = std::bit_cast<float>(reader.u32());
    if (!(std::abs(norm_of(r.vector) - 1.0) <= kUnitTolerance)) {
      fail(ErrorCode::CorruptStore, "record vector is not unit-norm");
    }
    c.records_.push_back(std::move(r));
  }
  if (!reader.done()) fail(ErrorCode::CorruptStore, "trailing bytes after last record");
  c.next_id_ = next_id;
  return c;
}

void delete_collection(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  if (ec && ec != std::errc::no_such_file_or_directory) {
    fail(ErrorCode::Io, "cannot delete " + dir.string() + ": " + ec.message());
  }
}

}  // namespace ragkit
