#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "mtrec/dataset.hpp"

namespace mtrec {

/// Identifies which experiment case a request belongs to.
struct RequestTag {
  UserId user_id = 0;
  std::string method;  // "baseline", "none", "MR1".."MR4", "k=5", ...
  std::int64_t iteration = 0;

  bool operator==(const RequestTag&) const = default;
};

struct CompletionRequest {
  std::string model = "gpt-3.5-turbo";
  std::string prompt_text;
  double temperature = 1.0;
  int max_tokens = 512;
  RequestTag tag;

  /// Throws InvalidArgument on an empty prompt or temperature outside [0, 2].
  void validate() const;
};

enum class ProviderKind { kRemote, kReplay, kMock };

std::string_view to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(std::string_view name);

struct CompletionResponse {
  std::string raw_text;
  ProviderKind provider = ProviderKind::kMock;
  std::chrono::milliseconds latency{0};
  bool retrieved_from_cache = false;
};

/// Canonical serialization of the keyed request fields (sorted-key JSON).
std::string canonical_request(const CompletionRequest& request);

/// Lower-case hex SHA-256 of `canonical_request(request)`.
std::string cache_key(const CompletionRequest& request);

class Provider {
 public:
  virtual ~Provider() = default;
  /// Thread-safe. Throws ProviderError on failure.
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

/// Append-only JSON-lines store of recorded completions. Lookups and appends
/// may be issued from several threads; appends go through a single lock.
class CacheStore {
 public:
  /// Loads `path` when it exists; new records are appended to it.
  explicit CacheStore(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& key) const;

  /// Appends one record unless the key is already stored.
  void append(const CompletionRequest& request, const std::string& raw_text);

  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> responses_;
};

/// Serves completions from a CacheStore. On a miss it delegates to
/// `fallback` when one is given; otherwise it throws
/// ProviderError("missing recording ...").
class ReplayProvider : public Provider {
 public:
  ReplayProvider(std::shared_ptr<CacheStore> store, std::shared_ptr<Provider> fallback = {});
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  std::shared_ptr<CacheStore> store_;
  std::shared_ptr<Provider> fallback_;
};

/// Passes requests to `inner` and appends every success to `store`.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(std::shared_ptr<Provider> inner, std::shared_ptr<CacheStore> store);
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  std::shared_ptr<Provider> inner_;
  std::shared_ptr<CacheStore> store_;
};

/// Deterministic in-process recommender standing in for the LLM.
class MockProvider : public Provider {
 public:
  MockProvider(std::shared_ptr<const MovieCatalog> catalog, double noise_level,
               std::uint64_t seed);
  ~MockProvider() override;
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double noise_level_;
  std::uint64_t seed_;
};

/// Token bucket limiting the request rate. `acquire` blocks until a token is
/// available.
class TokenBucket {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;
  using Sleeper = std::function<void(std::chrono::steady_clock::duration)>;

  TokenBucket(double requests_per_minute, double burst, Clock clock = {},
              Sleeper sleeper = {});
  void acquire();

 private:
  std::mutex mutex_;
  double rate_per_second_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  Clock clock_;
  Sleeper sleeper_;
};

struct RemoteConfig {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string api_key;
  std::chrono::milliseconds timeout{60'000};
  int max_attempts = 5;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{30'000};
  double requests_per_minute = 60.0;
  std::uint64_t jitter_seed = 0;

  /// Fills base_url and api_key from LLM_BASE_URL / LLM_API_KEY when unset.
  void apply_environment();
};

/// OpenAI-compatible chat completions client.
class RemoteProvider : public Provider {
 public:
  explicit RemoteProvider(RemoteConfig config);
  ~RemoteProvider() override;
  CompletionResponse complete(const CompletionRequest& request) override;

  /// Request body sent for `request`.
  static std::string request_body(const CompletionRequest& request);
  /// Extracts choices[0].message.content; throws ProviderError when absent.
  static std::string extract_content(std::string_view response_body);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Everything needed to build the provider stack for an experiment.
struct ProviderConfig {
  ProviderKind kind = ProviderKind::kMock;
  std::string model = "gpt-3.5-turbo";
  double temperature = 1.0;
  int max_tokens = 512;
  double mock_noise = 0.0;
  std::optional<std::filesystem::path> cache_path;
  bool strict_replay = false;
  int max_in_flight = 4;
  RemoteConfig remote;
};

/// Builds the provider described by `config`:
///   mock   -> MockProvider (recorded when a cache path is set)
///   remote -> RemoteProvider (recorded when a cache path is set)
///   replay -> ReplayProvider over the cache; with strict_replay off a miss
///             falls back to the mock provider and is recorded.
std::shared_ptr<Provider> make_provider(const ProviderConfig& config,
                                        std::shared_ptr<const MovieCatalog> catalog,
                                        std::uint64_t master_seed);

}  // namespace mtrec
