#include "mtrec/gateway.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mtrec/error.hpp"
#include "mtrec/mock_recommender.hpp"
#include "mtrec/random.hpp"

namespace mtrec {
namespace {

using json = nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

json tag_json(const RequestTag& tag) {
  return json{{"user_id", tag.user_id}, {"method", tag.method}, {"iteration", tag.iteration}};
}

json request_json(const CompletionRequest& r) {
  return json{{"model", r.model},
              {"prompt_text", r.prompt_text},
              {"temperature", r.temperature},
              {"max_tokens", r.max_tokens},
              {"tag", tag_json(r.tag)}};
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

constexpr std::uint64_t kMockStream = 0x6D6F636BULL;  // "mock"

}  // namespace

void CompletionRequest::validate() const {
  if (prompt_text.empty()) throw InvalidArgument("prompt_text is empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw InvalidArgument("temperature must lie in [0, 2]");
  }
  if (max_tokens < 1) throw InvalidArgument("max_tokens must be positive");
}

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kRemote: return "remote";
    case ProviderKind::kReplay: return "replay";
    case ProviderKind::kMock: return "mock";
  }
  return "?";
}

ProviderKind provider_kind_from_string(std::string_view name) {
  if (name == "remote") return ProviderKind::kRemote;
  if (name == "replay") return ProviderKind::kReplay;
  if (name == "mock") return ProviderKind::kMock;
  throw InvalidArgument("unknown provider '" + std::string(name) + "'");
}

std::string canonical_request(const CompletionRequest& request) {
  // nlohmann::json objects are key-sorted and floats print as shortest
  // round-trip, so the dump is stable across runs and platforms.
  const json keyed{{"model", request.model},
                   {"prompt_text", request.prompt_text},
                   {"temperature", request.temperature},
                   {"tag", tag_json(request.tag)}};
  return keyed.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string cache_key(const CompletionRequest& request) {
  return sha256_hex(canonical_request(request));
}

CacheStore::CacheStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json record = json::parse(line);
      responses_.emplace(record.at("key").get<std::string>(),
                         record.at("response").get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError("bad cache record in " + path_.string() + ": " + e.what(), line_no);
    }
  }
}

std::optional<std::string> CacheStore::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = responses_.find(key);
  if (it == responses_.end()) return std::nullopt;
  return it->second;
}

void CacheStore::append(const CompletionRequest& request, const std::string& raw_text) {
  const std::string key = cache_key(request);
  std::lock_guard lock(mutex_);
  if (responses_.contains(key)) return;
  const json record{{"key", key},
                    {"request", request_json(request)},
                    {"response", raw_text},
                    {"created_at", utc_now()}};
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to cache " + path_.string());
  out << record.dump() << '\n';
  if (!out) throw IoError("failed writing cache " + path_.string());
  responses_.emplace(key, raw_text);
}

std::size_t CacheStore::size() const {
  std::lock_guard lock(mutex_);
  return responses_.size();
}

ReplayProvider::ReplayProvider(std::shared_ptr<CacheStore> store,
                               std::shared_ptr<Provider> fallback)
    : store_(std::move(store)), fallback_(std::move(fallback)) {
  if (!store_) throw InvalidArgument("replay provider needs a cache");
}

CompletionResponse ReplayProvider::complete(const CompletionRequest& request) {
  request.validate();
  const std::string key = cache_key(request);
  if (auto hit = store_->lookup(key)) {
    return CompletionResponse{std::move(*hit), ProviderKind::kReplay,
                              std::chrono::milliseconds{0}, true};
  }
  if (!fallback_) {
    throw MissingRecording("missing recording for key " + key + " (user " +
                           std::to_string(request.tag.user_id) + ", " + request.tag.method +
                           ", iteration " + std::to_string(request.tag.iteration) + ")");
  }
  auto response = fallback_->complete(request);
  store_->append(request, response.raw_text);
  return response;
}

RecordingProvider::RecordingProvider(std::shared_ptr<Provider> inner,
                                     std::shared_ptr<CacheStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

CompletionResponse RecordingProvider::complete(const CompletionRequest& request) {
  auto response = inner_->complete(request);
  store_->append(request, response.raw_text);
  return response;
}

struct MockProvider::Impl {
  MockRecommender recommender;
};

MockProvider::MockProvider(std::shared_ptr<const MovieCatalog> catalog, double noise_level,
                           std::uint64_t seed)
    : impl_(std::make_unique<Impl>(Impl{MockRecommender(std::move(catalog))})),
      noise_level_(noise_level),
      seed_(seed) {
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) {
    throw InvalidArgument("mock noise level must lie in [0, 1]");
  }
}

MockProvider::~MockProvider() = default;

CompletionResponse MockProvider::complete(const CompletionRequest& request) {
  request.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = mix64(seed_ ^ fnv1a64(cache_key(request)));
  CompletionResponse response;
  response.raw_text = impl_->recommender.recommend(request.prompt_text, noise_level_, seed);
  response.provider = ProviderKind::kMock;
  response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  return response;
}

TokenBucket::TokenBucket(double requests_per_minute, double burst, Clock clock,
                         Sleeper sleeper)
    : rate_per_second_(requests_per_minute / 60.0),
      capacity_(burst),
      tokens_(burst),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](auto d) { std::this_thread::sleep_for(d); })) {
  if (!(requests_per_minute > 0.0)) throw InvalidArgument("rate must be positive");
  if (!(burst >= 1.0)) throw InvalidArgument("burst must be at least 1");
  last_ = clock_();
}

void TokenBucket::acquire() {
  std::unique_lock lock(mutex_);
  while (true) {
    const auto now = clock_();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_second_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rate_per_second_;
    sleeper_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(wait)));
  }
}

void RemoteConfig::apply_environment() {
  if (base_url.empty()) {
    if (const char* url = std::getenv("LLM_BASE_URL")) base_url = url;
  }
  if (api_key.empty()) {
    if (const char* key = std::getenv("LLM_API_KEY")) api_key = key;
  }
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config,
                                        std::shared_ptr<const MovieCatalog> catalog,
                                        std::uint64_t master_seed) {
  const std::uint64_t mock_seed = derive_seed(master_seed, 0, kMockStream, 0);
  auto mock = [&]() -> std::shared_ptr<Provider> {
    if (!catalog) throw InvalidArgument("mock provider needs a movie catalog");
    return std::make_shared<MockProvider>(catalog, config.mock_noise, mock_seed);
  };
  std::shared_ptr<CacheStore> store;
  if (config.cache_path) store = std::make_shared<CacheStore>(*config.cache_path);

  switch (config.kind) {
    case ProviderKind::kMock: {
      auto provider = mock();
      if (store) return std::make_shared<RecordingProvider>(provider, store);
      return provider;
    }
    case ProviderKind::kRemote: {
      RemoteConfig remote = config.remote;
      remote.apply_environment();
      if (remote.jitter_seed == 0) remote.jitter_seed = master_seed;
      std::shared_ptr<Provider> provider = std::make_shared<RemoteProvider>(remote);
      if (store) return std::make_shared<RecordingProvider>(provider, store);
      return provider;
    }
    case ProviderKind::kReplay: {
      if (!store) throw InvalidArgument("replay provider needs --cache");
      return std::make_shared<ReplayProvider>(
          store, config.strict_replay ? nullptr : mock());
    }
  }
  throw InvalidArgument("unknown provider kind");
}

}  // namespace mtrec
