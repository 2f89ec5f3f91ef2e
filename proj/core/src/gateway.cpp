#include "biasbench/gateway.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <nlohmann/json.hpp>
#include <thread>

#include "biasbench/error.hpp"
#include "biasbench/run_store.hpp"

namespace biasbench {

using nlohmann::json;

Millis RetryPolicy::backoff_before(int attempt) const {
  if (attempt <= 1) return Millis{0};
  double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt - 2);
  return Millis{static_cast<Millis::rep>(std::min(ms, static_cast<double>(max_backoff.count())))};
}

void ModelConfig::validate() const {
  if (model_id.empty()) throw ValidationError("model id must be non-empty");
  if (!(temperature >= 0.0)) throw ValidationError(fmt::format("temperature {} must be >= 0", temperature));
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ValidationError(fmt::format("top_p {} must lie in (0, 1]", top_p));
  if (top_k < -1 || top_k == 0) throw ValidationError(fmt::format("top_k {} must be -1 or positive", top_k));
  if (max_tokens < 1) throw ValidationError("max_tokens must be positive");
  if (retry.max_attempts < 1) throw ValidationError("retry cap must be at least 1");
  if (rate_limit < 0.0) throw ValidationError("rate limit must be non-negative");
}

PromptRef ref_of(const Prompt& prompt) { return {prompt.template_id, prompt.instance_index, prompt.level}; }

std::string_view to_string(ResponseError e) {
  switch (e) {
    case ResponseError::None: return "none";
    case ResponseError::Transport: return "transport";
    case ResponseError::Authentication: return "authentication";
    case ResponseError::Provider: return "provider";
  }
  return "unknown";
}

std::optional<ResponseError> parse_response_error(std::string_view text) {
  for (auto e : {ResponseError::None, ResponseError::Transport, ResponseError::Authentication, ResponseError::Provider}) {
    if (to_string(e) == text) return e;
  }
  return std::nullopt;
}

std::string temperature_key(double temperature) { return fmt::format("{}", temperature); }

std::string build_request_body(const Prompt& prompt, const ModelConfig& config) {
  json body = {
      {"model", config.model_id},
      {"messages", json::array({{{"role", "user"}, {"content", prompt.text}}})},
      {"temperature", config.temperature},
      {"top_p", config.top_p},
      {"max_tokens", config.max_tokens},
  };
  if (config.top_k != -1) body["top_k"] = config.top_k;
  return body.dump();
}

std::optional<std::string> parse_completion_text(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const json& first = (*choices)[0];
  if (auto msg = first.find("message"); msg != first.end() && msg->is_object()) {
    auto content = msg->find("content");
    if (content != msg->end() && content->is_string()) return content->get<std::string>();
  }
  if (auto text = first.find("text"); text != first.end() && text->is_string()) return text->get<std::string>();
  return std::nullopt;
}

RateLimiter::RateLimiter(double per_second)
    : spacing_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(per_second > 0 ? 1.0 / per_second : 0.0))),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + spacing_;
  }
  std::this_thread::sleep_until(slot);
}

RateLimiter* RateLimiterRegistry::limiter_for(const ModelConfig& config) {
  if (config.rate_limit <= 0.0) return nullptr;
  std::lock_guard lock(mu_);
  auto& slot = limiters_[config.endpoint];
  if (!slot) slot = std::make_unique<RateLimiter>(config.rate_limit);
  return slot.get();
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError(fmt::format("endpoint '{}' has no scheme", url));
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  ep.path = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  if (!ep.path.ends_with("/chat/completions")) ep.path += "/chat/completions";
  return ep;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms = std::chrono::duration_cast<Millis>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

ResponseRecord submit(const Prompt& prompt, const ModelConfig& config, RateLimiter* limiter) {
  ResponseRecord rec;
  rec.prompt_ref = ref_of(prompt);
  rec.model_id = config.model_id;
  rec.temperature = config.temperature;

  Endpoint ep;
  try {
    config.validate();
    ep = split_endpoint(config.endpoint);
  } catch (const ValidationError& e) {
    rec.error = ResponseError::Provider;
    rec.error_message = e.what();
    rec.timestamp = utc_timestamp();
    return rec;
  }

  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", fmt::format("Bearer {}", key));
    }
  }
  const std::string body = build_request_body(prompt, config);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(config.request_timeout);
  const auto started = std::chrono::steady_clock::now();

  for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
    std::this_thread::sleep_for(config.retry.backoff_before(attempt));
    if (limiter != nullptr) limiter->acquire();
    rec.attempt = attempt;

    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(ep.path, headers, body, "application/json");

    if (!res) {
      rec.error = ResponseError::Transport;
      rec.error_message = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      if (auto text = parse_completion_text(res->body)) {
        rec.response_text = std::move(*text);
        rec.error = ResponseError::None;
        rec.error_message.clear();
      } else {
        rec.error = ResponseError::Provider;
        rec.error_message = "response has no completion text";
      }
      break;
    }
    rec.error_message = fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 200));
    if (res->status == 401 || res->status == 403) {
      rec.error = ResponseError::Authentication;
      break;
    }
    if (!retryable(res->status)) {
      rec.error = ResponseError::Provider;
      break;
    }
    // Retryable statuses that never clear are infrastructure failures.
    rec.error = ResponseError::Transport;
  }
  rec.latency = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - started);
  rec.timestamp = utc_timestamp();
  return rec;
}

Responder make_http_responder() {
  auto registry = std::make_shared<RateLimiterRegistry>();
  return [registry](const Prompt& prompt, const ModelConfig& config) {
    return submit(prompt, config, registry->limiter_for(config));
  };
}

BatchSummary run_batch(const std::vector<Prompt>& prompts, const std::vector<ModelConfig>& configs,
                       std::size_t parallelism, RunStore& store, const Responder& responder) {
  if (parallelism == 0) throw ValidationError("parallelism must be at least 1");
  BatchSummary summary;

  struct Item {
    const Prompt* prompt;
    const ModelConfig* config;
  };
  std::vector<Item> items;
  for (const ModelConfig& cfg : configs) {
    for (const Prompt& p : prompts) {
      if (store.has_success(ref_of(p), cfg.model_id, cfg.temperature)) {
        ++summary.skipped;
      } else {
        items.push_back({&p, &cfg});
      }
    }
  }
  summary.submitted = items.size();
  if (items.empty()) return summary;

  // Results are committed in item order through a reorder buffer.
  std::vector<std::optional<ResponseRecord>> done(items.size());
  std::mutex commit_mu;
  std::size_t next_commit = 0;
  std::atomic<std::size_t> next_item{0};
  std::atomic<std::size_t> failed{0};
  std::exception_ptr commit_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next_item.fetch_add(1);
      if (i >= items.size()) return;
      ResponseRecord rec;
      try {
        rec = responder(*items[i].prompt, *items[i].config);
      } catch (const std::exception& e) {
        rec = ResponseRecord{};
        rec.prompt_ref = ref_of(*items[i].prompt);
        rec.model_id = items[i].config->model_id;
        rec.temperature = items[i].config->temperature;
        rec.error = ResponseError::Provider;
        rec.error_message = e.what();
      }
      if (!rec.ok()) failed.fetch_add(1);
      std::lock_guard lock(commit_mu);
      done[i] = std::move(rec);
      try {
        while (next_commit < done.size() && done[next_commit]) {
          store.append(*done[next_commit]);
          done[next_commit].reset();
          ++next_commit;
        }
      } catch (...) {
        if (!commit_error) commit_error = std::current_exception();
        next_item.store(items.size());
        return;
      }
    }
  };

  const std::size_t threads = std::min(parallelism, items.size());
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (commit_error) std::rethrow_exception(commit_error);
  summary.failed = failed.load();
  return summary;
}

}  // namespace biasbench
