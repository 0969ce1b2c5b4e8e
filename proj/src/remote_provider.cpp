#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <thread>

#include <nlohmann/json.hpp>

#include "mtrec/error.hpp"
#include "mtrec/gateway.hpp"
#include "mtrec/random.hpp"

namespace mtrec {
namespace {

using json = nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + /v1/chat/completions
};

Endpoint split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument("base URL needs a scheme: '" + base_url + "'");
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint endpoint;
  endpoint.origin = base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  endpoint.path = prefix + "/v1/chat/completions";
  return endpoint;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

struct RemoteProvider::Impl {
  RemoteConfig config;
  Endpoint endpoint;
  TokenBucket bucket;
  std::mutex rng_mutex;
  Rng jitter;

  explicit Impl(RemoteConfig c)
      : config(std::move(c)),
        endpoint(split_base_url(config.base_url)),
        bucket(config.requests_per_minute, 1.0),
        jitter(config.jitter_seed) {}

  // Decorrelated jitter: sleep = min(cap, uniform(base, 3 * previous)).
  std::chrono::milliseconds next_backoff(std::chrono::milliseconds previous) {
    const double base = static_cast<double>(config.backoff_base.count());
    const double upper = std::max(base, 3.0 * static_cast<double>(previous.count()));
    double draw;
    {
      std::lock_guard lock(rng_mutex);
      draw = jitter.uniform(base, upper);
    }
    const double capped = std::min(static_cast<double>(config.backoff_cap.count()), draw);
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
  }
};

RemoteProvider::RemoteProvider(RemoteConfig config) {
  if (config.base_url.empty()) {
    throw InvalidArgument("remote provider needs a base URL (LLM_BASE_URL)");
  }
  if (config.api_key.empty()) {
    throw InvalidArgument("remote provider needs an API key (LLM_API_KEY)");
  }
  if (config.max_attempts < 1) throw InvalidArgument("max_attempts must be positive");
  impl_ = std::make_unique<Impl>(std::move(config));
}

RemoteProvider::~RemoteProvider() = default;

std::string RemoteProvider::request_body(const CompletionRequest& request) {
  const json body{
      {"model", request.model},
      {"messages", json::array({json{{"role", "user"}, {"content", request.prompt_text}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens}};
  return body.dump();
}

std::string RemoteProvider::extract_content(std::string_view response_body) {
  json body;
  try {
    body = json::parse(response_body);
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed provider reply: ") + e.what());
  }
  try {
    const auto& content = body.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ProviderError("malformed provider reply: content is not text");
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw ProviderError("malformed provider reply: missing choices[0].message.content");
  }
}

CompletionResponse RemoteProvider::complete(const CompletionRequest& request) {
  request.validate();
  auto& cfg = impl_->config;
  const std::string body = request_body(request);
  const httplib::Headers headers{{"Authorization", "Bearer " + cfg.api_key}};
  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto timeout_us =
      std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - timeout_s);

  std::string last_error = "no attempt made";
  std::chrono::milliseconds backoff = cfg.backoff_base;
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    if (attempt > 1) {
      backoff = impl_->next_backoff(backoff);
      std::this_thread::sleep_for(backoff);
    }
    impl_->bucket.acquire();
    const auto start = std::chrono::steady_clock::now();

    httplib::Client client(impl_->endpoint.origin);
    client.set_connection_timeout(timeout_s.count(), timeout_us.count());
    client.set_read_timeout(timeout_s.count(), timeout_us.count());
    client.set_write_timeout(timeout_s.count(), timeout_us.count());
    auto result = client.Post(impl_->endpoint.path, headers, body, "application/json");

    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status == 401 || status == 403) {
      throw ProviderError("authentication failure (HTTP " + std::to_string(status) + ")");
    }
    if (retryable_status(status)) {
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    if (status < 200 || status >= 300) {
      throw ProviderError("provider rejected request (HTTP " + std::to_string(status) +
                          "): " + result->body.substr(0, 200));
    }
    CompletionResponse response;
    response.raw_text = extract_content(result->body);
    response.provider = ProviderKind::kRemote;
    response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    return response;
  }
  throw ProviderError("retries exhausted after " + std::to_string(cfg.max_attempts) +
                      " attempts: " + last_error);
}

}  // namespace mtrec
