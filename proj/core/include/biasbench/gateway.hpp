#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "biasbench/prompt.hpp"

namespace biasbench {

using Millis = std::chrono::milliseconds;

struct RetryPolicy {
  int max_attempts = 4;
  Millis initial_backoff{500};
  double multiplier = 2.0;
  Millis max_backoff{8000};

  /// Delay before attempt `attempt` (2-based; attempt 1 never waits).
  Millis backoff_before(int attempt) const;
};

/// Sampling and transport settings for one (model, temperature) pair.
struct ModelConfig {
  std::string model_id;
  /// Base URL such as "http://localhost:8000/v1"; "/chat/completions" is
  /// appended unless already present.
  std::string endpoint;
  double temperature = 0.2;
  double top_p = 1.0;
  int top_k = -1;  // -1 leaves sampling unrestricted and is not sent
  int max_tokens = 1024;
  Millis request_timeout{60000};
  /// Environment variable holding the bearer token; empty disables auth.
  std::string api_key_env = "OPENAI_API_KEY";
  /// Requests per second against this endpoint; 0 means unlimited.
  double rate_limit = 0.0;
  RetryPolicy retry;

  void validate() const;
};

struct PromptRef {
  std::string template_id;
  std::size_t instance_index = 0;
  int level = 1;

  auto operator<=>(const PromptRef&) const = default;
  bool operator==(const PromptRef&) const = default;
};

PromptRef ref_of(const Prompt& prompt);

enum class ResponseError { None, Transport, Authentication, Provider };

std::string_view to_string(ResponseError e);
std::optional<ResponseError> parse_response_error(std::string_view text);

struct ResponseRecord {
  PromptRef prompt_ref;
  std::string model_id;
  double temperature = 0.0;
  std::string response_text;
  Millis latency{0};
  int attempt = 0;
  /// ISO-8601 UTC; empty for simulated responses.
  std::string timestamp;
  ResponseError error = ResponseError::None;
  std::string error_message;

  bool ok() const { return error == ResponseError::None; }
  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

/// Canonical text form of a temperature used in store keys and file names.
std::string temperature_key(double temperature);

/// Chat-completions request body. top_k is omitted when it is -1.
std::string build_request_body(const Prompt& prompt, const ModelConfig& config);

/// choices[0].message.content of a chat-completions response, if present.
std::optional<std::string> parse_completion_text(const std::string& body);

/// Minimum-spacing limiter shared by every request to one endpoint.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration spacing_;
  std::chrono::steady_clock::time_point next_;
};

/// One limiter per endpoint, created on first use.
class RateLimiterRegistry {
 public:
  /// Null when `config.rate_limit` is 0.
  RateLimiter* limiter_for(const ModelConfig& config);

 private:
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<RateLimiter>> limiters_;
};

/// Posts one prompt to the configured endpoint. Retries 408, 429, 5xx and
/// transport failures with exponential backoff up to the attempt cap; 401 and
/// 403 fail at once as authentication errors, other 4xx as provider errors.
/// Never throws for endpoint failures: the returned record carries the error.
ResponseRecord submit(const Prompt& prompt, const ModelConfig& config, RateLimiter* limiter = nullptr);

/// Produces one response for a (prompt, config) pair.
using Responder = std::function<ResponseRecord(const Prompt&, const ModelConfig&)>;

/// Responder backed by submit() with per-endpoint rate limiting.
Responder make_http_responder();

class RunStore;

struct BatchSummary {
  std::size_t submitted = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

/// Runs every (config, prompt) pair not already answered successfully in
/// `store`, with at most `parallelism` requests in flight. Records are
/// committed to the store in work-item order, so store files do not depend
/// on scheduling. Throws ValidationError when parallelism is 0.
BatchSummary run_batch(const std::vector<Prompt>& prompts, const std::vector<ModelConfig>& configs,
                       std::size_t parallelism, RunStore& store, const Responder& responder);

}  // namespace biasbench
