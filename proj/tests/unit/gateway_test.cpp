#include <filesystem>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mtrec/error.hpp"
#include "mtrec/gateway.hpp"
#include "mtrec/mock_recommender.hpp"
#include "user509_prompts.hpp"

using namespace mtrec;

namespace {

const std::filesystem::path kData = MTREC_TEST_DATA_DIR;

CompletionRequest sample_request() {
  CompletionRequest r;
  r.prompt_text = user509::kOriginal;
  r.tag = RequestTag{509, "none", 3};
  return r;
}

std::filesystem::path fresh_path(const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() / ("mtrec_gateway_" + name);
  std::filesystem::remove(path);
  return path;
}

std::shared_ptr<const MovieCatalog> catalog() {
  static auto c = std::make_shared<const MovieCatalog>(load_movies(kData / "movies.csv"));
  return c;
}

// Counts calls and answers with a fixed text.
class CountingProvider : public Provider {
 public:
  CompletionResponse complete(const CompletionRequest&) override {
    ++calls;
    return CompletionResponse{"1. Heat (1995)", ProviderKind::kRemote, {}, false};
  }
  int calls = 0;
};

}  // namespace

TEST(CacheKey, StableAndSensitive) {
  const auto base = sample_request();
  EXPECT_EQ(cache_key(base), cache_key(sample_request()));
  EXPECT_EQ(cache_key(base).size(), 64u);

  auto other = base;
  other.tag.iteration = 4;
  EXPECT_NE(cache_key(other), cache_key(base));
  other = base;
  other.prompt_text.back() = 'S';
  EXPECT_NE(cache_key(other), cache_key(base));
  other = base;
  other.model = "other-model";
  EXPECT_NE(cache_key(other), cache_key(base));
  other = base;
  other.temperature = 0.7;
  EXPECT_NE(cache_key(other), cache_key(base));
  other = base;
  other.tag.method = "MR1";
  EXPECT_NE(cache_key(other), cache_key(base));
  other = base;
  other.tag.user_id = 1;
  EXPECT_NE(cache_key(other), cache_key(base));
  // max_tokens is not part of the keyed fields.
  other = base;
  other.max_tokens = 7;
  EXPECT_EQ(cache_key(other), cache_key(base));
}

TEST(CacheKey, CanonicalFormIsSortedJson) {
  CompletionRequest r;
  r.model = "m";
  r.prompt_text = "p";
  r.temperature = 1.0;
  r.tag = RequestTag{2, "MR3", 7};
  EXPECT_EQ(canonical_request(r),
            R"({"model":"m","prompt_text":"p","tag":{"iteration":7,"method":"MR3","user_id":2},"temperature":1.0})");
  // SHA-256 of that exact string (computed with Python's hashlib), pinned so
  // recorded caches stay valid across releases.
  EXPECT_EQ(cache_key(r), "05a603730e099e2feb7bccd00d874878ecb19a34b41911b0042e88b8f04412d6");
}

TEST(CompletionRequest, Validate) {
  auto r = sample_request();
  EXPECT_NO_THROW(r.validate());
  r.temperature = 2.5;
  EXPECT_THROW(r.validate(), InvalidArgument);
  r = sample_request();
  r.prompt_text.clear();
  EXPECT_THROW(r.validate(), InvalidArgument);
}

TEST(CacheStore, AppendAndReload) {
  const auto path = fresh_path("store.jsonl");
  {
    CacheStore store(path);
    EXPECT_EQ(store.size(), 0u);
    store.append(sample_request(), "1. A\n2. B");
    store.append(sample_request(), "ignored duplicate");
    EXPECT_EQ(store.size(), 1u);
  }
  CacheStore reloaded(path);
  EXPECT_EQ(reloaded.lookup(cache_key(sample_request())), "1. A\n2. B");

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  const auto record = nlohmann::json::parse(line);
  EXPECT_EQ(record.at("key"), cache_key(sample_request()));
  EXPECT_EQ(record.at("request").at("tag").at("user_id"), 509);
  EXPECT_TRUE(record.contains("created_at"));
  EXPECT_FALSE(std::getline(in, line));
}

TEST(CacheStore, ConcurrentAppendsAreSerialized) {
  const auto path = fresh_path("concurrent.jsonl");
  CacheStore store(path);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        auto r = sample_request();
        r.tag.iteration = t * 100 + i;
        store.append(r, "text " + std::to_string(i));
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(CacheStore(path).size(), 200u);
}

TEST(CacheStore, CorruptLineReportsLine) {
  const auto path = fresh_path("corrupt.jsonl");
  std::ofstream(path) << "{\"key\":\"a\",\"response\":\"x\"}\nnot json\n";
  try {
    CacheStore store(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ReplayProvider, HitAndStrictMiss) {
  auto store = std::make_shared<CacheStore>(fresh_path("replay.jsonl"));
  store->append(sample_request(), "1. Heat (1995)");
  ReplayProvider replay(store);
  const auto hit = replay.complete(sample_request());
  EXPECT_EQ(hit.raw_text, "1. Heat (1995)");
  EXPECT_TRUE(hit.retrieved_from_cache);
  EXPECT_EQ(hit.provider, ProviderKind::kReplay);

  auto miss = sample_request();
  miss.tag.iteration = 99;
  try {
    replay.complete(miss);
    FAIL();
  } catch (const MissingRecording& e) {
    EXPECT_NE(std::string(e.what()).find("missing recording"), std::string::npos);
  }
}

TEST(ReplayProvider, NonStrictMissFallsBackAndRecords) {
  auto store = std::make_shared<CacheStore>(fresh_path("fallback.jsonl"));
  auto inner = std::make_shared<CountingProvider>();
  ReplayProvider replay(store, inner);
  EXPECT_FALSE(replay.complete(sample_request()).retrieved_from_cache);
  EXPECT_TRUE(replay.complete(sample_request()).retrieved_from_cache);
  EXPECT_EQ(inner->calls, 1);
  EXPECT_EQ(store->size(), 1u);
}

TEST(RecordingProvider, AppendsEverySuccess) {
  auto store = std::make_shared<CacheStore>(fresh_path("recording.jsonl"));
  auto inner = std::make_shared<CountingProvider>();
  RecordingProvider recording(inner, store);
  recording.complete(sample_request());
  auto second = sample_request();
  second.tag.iteration = 4;
  recording.complete(second);
  EXPECT_EQ(store->size(), 2u);
}

TEST(MockProvider, DeterministicForSameRequest) {
  MockProvider mock(catalog(), 0.5, 1234);
  const auto a = mock.complete(sample_request());
  const auto b = mock.complete(sample_request());
  EXPECT_EQ(a.raw_text, b.raw_text);
  EXPECT_EQ(a.provider, ProviderKind::kMock);
  EXPECT_FALSE(a.retrieved_from_cache);
  EXPECT_THROW(MockProvider(catalog(), 1.5, 1), InvalidArgument);
}

TEST(MakeProvider, Kinds) {
  ProviderConfig config;
  EXPECT_NE(std::dynamic_pointer_cast<MockProvider>(make_provider(config, catalog(), 1)), nullptr);

  config.cache_path = fresh_path("make.jsonl");
  EXPECT_NE(std::dynamic_pointer_cast<RecordingProvider>(make_provider(config, catalog(), 1)),
            nullptr);

  config.kind = ProviderKind::kReplay;
  config.strict_replay = true;
  auto strict = make_provider(config, catalog(), 1);
  EXPECT_THROW(strict->complete(sample_request()), MissingRecording);

  config.cache_path.reset();
  EXPECT_THROW(make_provider(config, catalog(), 1), InvalidArgument);

  config.kind = ProviderKind::kRemote;
  config.remote.base_url = "";
  config.remote.api_key = "";
  ::unsetenv("LLM_BASE_URL");
  ::unsetenv("LLM_API_KEY");
  EXPECT_THROW(make_provider(config, catalog(), 1), InvalidArgument);
}

TEST(RemoteConfig, EnvironmentFillsUnsetFields) {
  ::setenv("LLM_BASE_URL", "http://127.0.0.1:9", 1);
  ::setenv("LLM_API_KEY", "secret", 1);
  RemoteConfig config;
  config.apply_environment();
  EXPECT_EQ(config.base_url, "http://127.0.0.1:9");
  EXPECT_EQ(config.api_key, "secret");
  RemoteConfig explicit_config;
  explicit_config.base_url = "http://example.invalid";
  explicit_config.apply_environment();
  EXPECT_EQ(explicit_config.base_url, "http://example.invalid");
  ::unsetenv("LLM_BASE_URL");
  ::unsetenv("LLM_API_KEY");
}

TEST(TokenBucket, WaitsForRefillWithFakeClock) {
  using namespace std::chrono;
  steady_clock::time_point now{};
  std::vector<steady_clock::duration> sleeps;
  TokenBucket bucket(
      60.0, 2.0, [&] { return now; },
      [&](steady_clock::duration d) {
        sleeps.push_back(d);
        now += d;
      });
  bucket.acquire();
  bucket.acquire();
  EXPECT_TRUE(sleeps.empty());  // burst of two
  bucket.acquire();
  ASSERT_EQ(sleeps.size(), 1u);
  EXPECT_NEAR(duration<double>(sleeps[0]).count(), 1.0, 1e-6);  // 60 rpm
  now += seconds(10);  // refill caps at the burst size
  bucket.acquire();
  bucket.acquire();
  EXPECT_EQ(sleeps.size(), 1u);
  bucket.acquire();
  EXPECT_EQ(sleeps.size(), 2u);
  EXPECT_THROW(TokenBucket(0.0, 1.0), InvalidArgument);
}

TEST(ProviderKindNames, RoundTrip) {
  for (auto k : {ProviderKind::kMock, ProviderKind::kRemote, ProviderKind::kReplay}) {
    EXPECT_EQ(provider_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(provider_kind_from_string("openai"), InvalidArgument);
}
