// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ragkit Authors

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Runs offline against the bundled mocks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "ragkit/corpus_ingest.hpp"
#include "ragkit/embedding.hpp"
#include "ragkit/error.hpp"
#include "ragkit/llm_gateway.hpp"
#include "ragkit/media_clients.hpp"
#include "ragkit/mock_server.hpp"
#include "ragkit/service.hpp"
#include "ragkit/text.hpp"
#include "ragkit/vector_store.hpp"
#include "ragkit/web_tools.hpp"

namespace {

using namespace ragkit;

// Tolerances.
constexpr double kWorkedMmrTol = 1e-9;
constexpr double kAudioPeakTol = 1e-9;

// Case counts.
constexpr int kMmrCorpora = 250;  // x5 lambdas
constexpr int kChunkerTexts = 600;
constexpr int kAudioCases = 300;
constexpr int kPromptCases = 300;

struct Failed {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw Failed{why};
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw Failed{"expected an error, none thrown"};
}

EmbeddingVector unit(std::vector<double> v) { return make_unit_vector(v); }

// ---------------------------------------------------------------------------

void mmr_oracle_equivalence() {
  std::mt19937 rng(4242);
  std::normal_distribution<double> g;
  int cases = 0;
  for (int i = 0; i < kMmrCorpora; ++i) {
    const std::size_t dim = 1 + rng() % 8;
    const std::size_t n = rng() % 13;
    auto draw = [&] {
      std::vector<double> v(dim);
      do {
        for (auto& x : v) x = g(rng);
      } while (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
      return unit(v);
    };
    Collection c("acc", dim);
    std::vector<RecordInput> items;
    std::vector<oracle::Vec> raw;
    for (std::size_t j = 0; j < n; ++j) {
      auto v = (j > 0 && rng() % 4 == 0) ? items[rng() % j].vector : draw();
      raw.push_back(v.values);
      items.push_back({"t", {}, std::move(v)});
    }
    c.add_records(std::move(items));
    const auto q = draw();
    const std::size_t k = rng() % 8;
    const std::size_t fetch_k = k + rng() % 8;
    for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto got = search_mmr(c, q, k, fetch_k, lambda);
      const auto want = oracle::brute_force_mmr(raw, q.values, k, fetch_k, lambda);
      require(got.size() == want.size(), "length differs in case " + std::to_string(i));
      for (std::size_t j = 0; j < want.size(); ++j) {
        require(got[j].id == want[j].id, "id sequence differs in case " + std::to_string(i));
      }
      if (lambda == 1.0) {
        const auto top = search_top_k(c, q, k);
        require(top.size() == got.size(), "lambda=1 length differs from top-k");
        for (std::size_t j = 0; j < top.size(); ++j) {
          require(top[j].id == got[j].id, "lambda=1 differs from top-k in case " + std::to_string(i));
        }
      }
      ++cases;
    }
  }
  require(cases >= 200, "too few cases");
}

void worked_mmr_case() {
  // q=[1,0]; d1=d2=[1,0]; d3=[0.6,0.8]; k=2; lambda=0.3.
  const std::vector<std::vector<double>> d{{1, 0}, {1, 0}, {0.6, 0.8}};
  const std::vector<double> q{1, 0};
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return a[0] * b[0] + a[1] * b[1];
  };
  auto sim = [&](std::size_t a, std::size_t b) { return dot(d[a], d[b]); };
  const std::vector<double> rel{dot(d[0], q), dot(d[1], q), dot(d[2], q)};
  const std::vector<RecordId> ids{1, 2, 3};

  const auto picks = mmr_select(rel, ids, sim, 2, 0.3);
  require(picks.size() == 2, "expected two picks");
  require(ids[picks[0].candidate] == 1 && ids[picks[1].candidate] == 3, "selection is not [d1, d3]");
  require(std::abs(picks[1].objective - (-0.24)) <= kWorkedMmrTol, "d3 second-step score");

  // d2's second-step score, with d1 already selected.
  const std::vector<double> rel12{rel[0], rel[1]};
  const std::vector<RecordId> ids12{1, 2};
  const auto forced = mmr_select(rel12, ids12, sim, 2, 0.3);
  require(forced.size() == 2, "expected two picks from {d1, d2}");
  require(std::abs(forced[1].objective - (-0.4)) <= kWorkedMmrTol, "d2 second-step score");

  // Same selection through the stored collection; top-2 keeps the duplicate.
  Collection c("worked", 2);
  c.add_records({{"d1", {}, unit({1, 0})}, {"d2", {}, unit({1, 0})}, {"d3", {}, unit({0.6, 0.8})}});
  const auto hits = search_mmr(c, unit({1, 0}), 2, 3, 0.3);
  require(hits.size() == 2 && hits[0].id == 0 && hits[1].id == 2, "collection selection");
  const auto top = search_top_k(c, unit({1, 0}), 2);
  require(top.size() == 2 && top[0].id == 0 && top[1].id == 1, "top-2 should be [d1, d2]");
}

std::string random_text(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {
      "a", "bc", "def", "ghij", "klmnopqrstuv", "\xc3\xa9t\xc3\xa9", "\xe2\x82\xac", "x1",
      " ", " ", "\n", "\n\n", "  "};
  std::string out;
  const int n = std::uniform_int_distribution<int>(0, 60)(rng);
  for (int i = 0; i < n; ++i) out += pieces[rng() % pieces.size()];
  if (rng() % 5 == 0) out += std::string(std::uniform_int_distribution<int>(1, 90)(rng), 'z');
  return out;
}

void chunker_laws() {
  {
    const auto chunks = split_text("abcdefghijk", ChunkingParams{5, 2, {}});
    const std::vector<std::pair<std::size_t, std::size_t>> want{{0, 5}, {3, 8}, {6, 11}};
    require(chunks.size() == want.size(), "abcdefghijk/5/2 chunk count");
    for (std::size_t i = 0; i < want.size(); ++i) {
      require(chunks[i].span.start == want[i].first && chunks[i].span.end == want[i].second,
              "abcdefghijk/5/2 span " + std::to_string(i));
    }
  }
  std::mt19937 rng(5150);
  for (int i = 0; i < kChunkerTexts; ++i) {
    const auto text = random_text(rng);
    const bool window = i % 2 == 1;
    ChunkingParams p;
    p.chunk_size = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    p.overlap = std::uniform_int_distribution<std::size_t>(0, p.chunk_size - 1)(rng);
    if (window) p.separators.clear();
    const auto chunks = split_text(text, p);
    const auto n = oracle::codepoints(text);
    const auto tag = " (case " + std::to_string(i) + ")";
    if (n == 0) {
      require(chunks.empty(), "empty text gave chunks" + tag);
      continue;
    }
    std::size_t covered = 0;
    for (std::size_t j = 0; j < chunks.size(); ++j) {
      const auto& s = chunks[j].span;
      require(s.start < s.end && s.end <= n, "span out of range" + tag);
      require(s.end - s.start <= p.chunk_size, "chunk longer than chunk_size" + tag);
      require(s.start <= covered, "uncovered characters" + tag);
      if (j > 0) {
        require(s.start > chunks[j - 1].span.start && s.end > chunks[j - 1].span.end,
                "spans out of order" + tag);
      }
      if (window && j > 0) {
        require(chunks[j - 1].span.end - s.start == p.overlap, "window overlap" + tag);
      }
      covered = std::max(covered, s.end);
    }
    require(!chunks.empty() && chunks.front().span.start == 0 && covered == n, "coverage" + tag);
  }
}

void store_persistence() {
  fixture::TempDir dir;
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  Collection c("persist", 16);
  std::vector<RecordInput> items;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> v(16);
    for (auto& x : v) x = g(rng);
    items.push_back({"record " + std::to_string(i), {{"source_uri", "r" + std::to_string(i)}}, unit(v)});
  }
  c.add_records(items);
  persist(c, dir / "c");
  const auto loaded = load_collection(dir / "c");
  require(loaded.size() == c.size(), "record count");
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& a = c.records()[i].vector.values;
    const auto& b = loaded.records()[i].vector.values;
    require(a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0,
            "vector " + std::to_string(i) + " not bit-identical");
  }
  require(loaded == c, "loaded collection differs");
  for (const auto& item : items) {
    const auto x = search_top_k(c, item.vector, 7);
    const auto y = search_top_k(loaded, item.vector, 7);
    for (std::size_t j = 0; j < x.size(); ++j) {
      require(x[j].id == y[j].id && x[j].score == y[j].score, "search results differ");
    }
  }

  const auto records = fixture::read_file(dir / "c" / "records.bin");
  auto corrupt = [&](const std::string& bytes, const std::string& what) {
    persist(c, dir / "c");
    fixture::write_file(dir / "c" / "records.bin", bytes);
    require(error_code_of([&] { load_collection(dir / "c"); }) == ErrorCode::CorruptStore,
            what + " not reported as CorruptStore");
  };
  auto bad_magic = records;
  bad_magic[0] ^= 0x20;
  corrupt(bad_magic, "bad magic");
  auto bad_version = records;
  bad_version[4] = 99;
  corrupt(bad_version, "bad version");
  corrupt(records.substr(0, records.size() - 3), "truncation");
  corrupt(records.substr(0, records.size() / 2), "truncation at half");
}

class ConcatMarkLlm {
 public:
  ConcatMarkLlm() {
    MockServerOptions o;
    o.llm_mode = LlmMockMode::ConcatMark;
    mock = MockServer::start(o);
    LlmEndpointConfig cfg;
    cfg.url = mock->llm_url();
    cfg.retries = 0;
    client = std::make_unique<LlmClient>(cfg);
  }
  std::unique_ptr<MockServer> mock;
  std::unique_ptr<LlmClient> client;
};

void summarizer_laws() {
  ConcatMarkLlm llm;
  SummarizeParams params;
  params.section_size_chars = 100;
  const GenParams gen;

  const auto one = summarize_long_text("A short note about rivers.", params, *llm.client, gen);
  require(one.n_sections == 1 && one.n_llm_calls == 1 && llm.mock->llm_request_count() == 1,
          "single section should take one call");

  for (std::size_t n : {3u, 5u}) {
    llm.mock->clear_logs();
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
      std::string p = "Paragraph " + std::to_string(i) + " ";
      while (p.size() < 90) p += "words ";
      p.resize(90);
      text += p + (i + 1 < n ? "\n\n" : "");
    }
    const auto s = summarize_long_text(text, params, *llm.client, gen);
    const auto requests = llm.mock->llm_requests();
    require(s.n_sections == n && s.n_llm_calls == n + 1 && requests.size() == n + 1,
            std::to_string(n) + " sections should take " + std::to_string(n + 1) + " calls");
    const auto final_user = fixture::last_user_content(requests.back());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto mark = concat_mark(fixture::last_user_content(requests[i]));
      const auto at = final_user.find(mark, cursor);
      require(at != std::string::npos, "final request is missing mark " + mark + " in order");
      cursor = at + mark.size();
    }
  }
}

void asr_preprocessing() {
  std::mt19937 rng(909);
  for (int i = 0; i < kAudioCases; ++i) {
    const double scale = std::uniform_real_distribution<double>(1e-6, 100.0)(rng);
    std::uniform_real_distribution<double> d(-scale, scale);
    AudioPayload p{16000, std::vector<double>(1 + rng() % 400)};
    for (auto& s : p.raw) s = d(rng);
    if (std::all_of(p.raw.begin(), p.raw.end(), [](double s) { return s == 0.0; })) continue;
    const auto once = normalize_audio(p);
    double peak = 0.0;
    for (double s : once.raw) peak = std::max(peak, std::abs(s));
    require(std::abs(peak - 1.0) <= kAudioPeakTol, "peak is not 1");
    require(normalize_audio(once).raw == once.raw, "normalize_audio is not idempotent");
  }
  require(error_code_of([] { normalize_audio({16000, {0.0, 0.0, 0.0}}); }) == ErrorCode::SilentAudio,
          "silent input accepted");

  const auto doc = nlohmann::json::parse(asr_request_body({16000, {0.5, -0.25, 1.0}}));
  require(doc.is_object() && doc.size() == 2, "ASR body must have exactly two keys");
  require(doc.contains("sampling_rate") && doc["sampling_rate"].is_number_integer(),
          "sampling_rate must be an integer");
  require(doc.contains("raw") && doc["raw"].is_array(), "raw must be an array");
  for (const auto& s : doc["raw"]) require(s.is_number_float(), "raw must hold floats");
  const auto golden = fixture::read_file(std::filesystem::path(RAGKIT_TEST_FIXTURES) / "golden" /
                                         "asr_request.json");
  require(asr_request_body({16000, {1.0, -0.5, 0.2}}) == golden, "ASR body differs from golden");
}

void image_generation_defaults() {
  const auto golden = fixture::read_file(std::filesystem::path(RAGKIT_TEST_FIXTURES) / "golden" /
                                         "image_generate_default.json");
  const auto body = image_gen_request_body("a cat", ImageGenParams{});
  require(body == golden, "default body differs from golden fixture: " + body);
  require(body.find("\"num_inference_steps\":4") != std::string::npos, "steps");
  require(body.find("\"guidance_scale\":0.0") != std::string::npos, "guidance");

  // And the bytes on the wire.
  auto mock = MockServer::start();
  generate_image({mock->image_generate_url(), 5000}, "a cat");
  const auto sent = mock->media_requests();
  require(sent.size() == 1 && sent[0].body == golden, "wire body differs from golden fixture");
}

void end_to_end_grounding() {
  auto mock = MockServer::start();
  fixture::TempDir pre;
  fixture::build_preindexed(pre.path(), "default");
  Service service(fixture::service_config(*mock, pre.path()));
  const auto id = service.create_session();

  MessageRequest req;
  req.mode = Mode::RagPreindexed;
  req.content = "knead the dough before baking";
  const auto reply = service.post_message(id, req);
  require(!reply.snippets.empty(), "no snippets retrieved");

  // Top hit by exhaustive scoring over the stored collection.
  const auto stored = load_collection(pre / "default");
  const auto q = hash_embed(req.content);
  const auto top = search_top_k(stored, q, 1);
  require(!top.empty() && reply.snippets[0].text == top[0].text, "top snippet is not the top hit");

  const auto requests = mock->llm_requests();
  require(requests.size() == 1, "expected exactly one LLM request");
  const auto context = fixture::context_block(requests[0]);
  require(context.starts_with(kContextHeader), "no context block in the LLM request");
  require(context.find(top[0].text) != std::string::npos, "context block lacks the top chunk");

  const auto history = service.get_history(id);
  require(history.size() == 2 && history[1].role == Role::Assistant &&
              history[1].content == reply.reply,
          "reply not recorded in history");
}

void session_isolation_and_fifo() {
  auto mock = MockServer::start();
  mock->set_llm_mode(LlmMockMode::Script);
  Service service(fixture::service_config(*mock));
  const auto a = service.create_session();
  const auto b = service.create_session();
  MessageRequest req;
  for (int i = 0; i < 5; ++i) {
    mock->push_llm_script({"reply-A" + std::to_string(i)});
    req.content = "question-A" + std::to_string(i);
    service.post_message(a, req);
    mock->push_llm_script({"reply-B" + std::to_string(i)});
    req.content = "question-B" + std::to_string(i);
    service.post_message(b, req);
  }
  for (const auto& [id, mine, theirs] :
       {std::tuple{a, std::string("-A"), std::string("-B")}, std::tuple{b, std::string("-B"), std::string("-A")}}) {
    const auto h = service.get_history(id);
    require(h.size() == 10, "history length");
    for (std::size_t i = 0; i < h.size(); ++i) {
      require(h[i].content.find(theirs) == std::string::npos, "histories crossed");
      const auto want = (i % 2 == 0 ? "question" : "reply") + mine + std::to_string(i / 2);
      require(h[i].content == want, "unexpected turn " + h[i].content);
    }
  }

  // Two concurrent posts to one session are served first come, first served.
  mock->set_llm_mode(LlmMockMode::Echo);
  mock->clear_logs();
  mock->set_llm_delay_ms(250);
  const auto s = service.create_session();
  MessageRequest first;
  first.content = "first message";
  MessageRequest second;
  second.content = "second message";
  std::thread t1([&] { service.post_message(s, first); });
  while (mock->llm_request_count() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  std::thread t2([&] { service.post_message(s, second); });
  t1.join();
  t2.join();
  const auto h = service.get_history(s);
  require(h.size() == 4 && h[0].content == "first message" && h[2].content == "second message",
          "same-session posts were not served in arrival order");
  const auto requests = mock->llm_requests();
  require(requests.size() == 2 && requests[1].find("first message") != std::string::npos,
          "second request's history snapshot lacks the first exchange");
}

void prompt_budget() {
  std::mt19937 rng(271);
  auto words = [&](int max) {
    std::string s;
    const int n = 1 + static_cast<int>(rng() % max);
    for (int i = 0; i < n; ++i) s += std::string(1 + rng() % 9, static_cast<char>('a' + rng() % 26)) + " ";
    return s;
  };
  for (int i = 0; i < kPromptCases; ++i) {
    const auto system = words(10);
    const auto user = words(10);
    std::vector<ContextSnippet> snippets;
    for (std::size_t j = 0, n = rng() % 6; j < n; ++j) {
      snippets.push_back({words(30), "s" + std::to_string(j), 0.5, j});
    }
    std::vector<ChatMessage> history;
    for (std::size_t j = 0, n = rng() % 5; j < n; ++j) {
      history.push_back({Role::User, words(12)});
      history.push_back({Role::Assistant, words(20)});
    }
    const auto fixed = estimate_tokens(system) + estimate_tokens(user);
    std::size_t prev_snippets = 0;
    std::size_t prev_history = 0;
    for (std::size_t budget = fixed; budget <= fixed + 400; budget += 1 + rng() % 9) {
      const auto b = assemble_prompt(system, snippets, history, user, budget);
      std::size_t total = 0;
      for (const auto& m : b.messages) total += estimate_tokens(m.content);
      require(total <= budget && b.estimated_tokens == total, "budget exceeded");
      require(b.included_snippets == snippets.size() || b.included_history_turns == 0,
              "a snippet was dropped while history remained");
      require(b.included_snippets >= prev_snippets && b.included_history_turns >= prev_history,
              "not monotone in budget");
      prev_snippets = b.included_snippets;
      prev_history = b.included_history_turns;
    }
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"mmr-oracle-equivalence", mmr_oracle_equivalence},
      {"mmr-worked-example", worked_mmr_case},
      {"chunker-laws", chunker_laws},
      {"vector-store-persistence", store_persistence},
      {"summarizer-laws", summarizer_laws},
      {"asr-preprocessing", asr_preprocessing},
      {"image-generation-defaults", image_generation_defaults},
      {"end-to-end-grounding", end_to_end_grounding},
      {"session-isolation-and-fifo", session_isolation_and_fifo},
      {"prompt-budget", prompt_budget},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string why;
    try {
      run();
    } catch (const Failed& f) {
      why = f.why;
    } catch (const std::exception& e) {
      why = std::string("unexpected exception: ") + e.what();
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    if (why.empty()) {
      std::cout << "PASS " << name << " (" << ms << " ms)\n";
    } else {
      std::cout << "FAIL " << name << ": " << why << '\n';
      ++failures;
    }
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
