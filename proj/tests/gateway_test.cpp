#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <nlohmann/json.hpp>
#include <thread>

#include "biasbench/error.hpp"
#include "biasbench/gateway.hpp"
#include "biasbench/run_store.hpp"

namespace bb = biasbench;
using nlohmann::json;

namespace {

bb::Prompt prompt(std::size_t index = 0, int level = 1) {
  bb::Prompt p;
  p.template_id = "t";
  p.instance_index = index;
  p.level = level;
  p.text = "Pick one.\n\nOptions:\nA. x\nB. y";
  p.answers = {{"A", "x", bb::AnswerLabel::Biased}, {"B", "y", bb::AnswerLabel::Unbiased}};
  return p;
}

std::string completion(const std::string& text) {
  return json{{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", text}}}}}}}.dump();
}

// Local chat-completions server for one test.
class FakeServer {
 public:
  explicit FakeServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

bb::ModelConfig config(const std::string& endpoint) {
  bb::ModelConfig c;
  c.model_id = "fake";
  c.endpoint = endpoint;
  c.api_key_env = "BIASBENCH_TEST_KEY";
  c.retry.initial_backoff = bb::Millis{5};
  c.retry.max_attempts = 4;
  c.request_timeout = bb::Millis{2000};
  return c;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("biasbench_gw_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(RequestBody, OmitsUnsetTopK) {
  bb::ModelConfig c = config("http://x");
  c.temperature = 0.7;
  auto body = json::parse(bb::build_request_body(prompt(), c));
  EXPECT_EQ(body["model"], "fake");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], prompt().text);
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.7);
  EXPECT_FALSE(body.contains("top_k"));
  c.top_k = 40;
  body = json::parse(bb::build_request_body(prompt(), c));
  EXPECT_EQ(body["top_k"], 40);
}

TEST(RequestBody, ParsesCompletionText) {
  EXPECT_EQ(bb::parse_completion_text(completion("B. y")), "B. y");
  EXPECT_EQ(bb::parse_completion_text(R"({"choices":[{"text":"legacy"}]})"), "legacy");
  EXPECT_FALSE(bb::parse_completion_text("not json"));
  EXPECT_FALSE(bb::parse_completion_text(R"({"choices":[]})"));
}

TEST(RetryPolicy, ExponentialAndCapped) {
  bb::RetryPolicy r;
  r.initial_backoff = bb::Millis{100};
  r.max_backoff = bb::Millis{350};
  EXPECT_EQ(r.backoff_before(1).count(), 0);
  EXPECT_EQ(r.backoff_before(2).count(), 100);
  EXPECT_EQ(r.backoff_before(3).count(), 200);
  EXPECT_EQ(r.backoff_before(4).count(), 350);
}

TEST(Submit, RetriesRateLimitThenSucceeds) {
  std::atomic<int> calls{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    res.set_content(completion("B. y"), "application/json");
  });
  const auto rec = bb::submit(prompt(), config(server.endpoint()));
  EXPECT_TRUE(rec.ok()) << rec.error_message;
  EXPECT_EQ(rec.attempt, 3);
  EXPECT_EQ(rec.response_text, "B. y");
  EXPECT_EQ(calls.load(), 3);
  EXPECT_FALSE(rec.timestamp.empty());
}

TEST(Submit, UnauthorizedFailsImmediately) {
  std::atomic<int> calls{0};
  std::string auth;
  FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    auth = req.get_header_value("Authorization");
    res.status = 401;
  });
  ::setenv("BIASBENCH_TEST_KEY", "secret-token", 1);
  const auto rec = bb::submit(prompt(), config(server.endpoint()));
  ::unsetenv("BIASBENCH_TEST_KEY");
  EXPECT_EQ(rec.error, bb::ResponseError::Authentication);
  EXPECT_EQ(calls.load(), 1);
  EXPECT_EQ(auth, "Bearer secret-token");
}

TEST(Submit, OtherClientErrorsAreProviderErrors) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  EXPECT_EQ(bb::submit(prompt(), config(server.endpoint())).error, bb::ResponseError::Provider);
}

TEST(Submit, TimeoutIsTransportError) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    res.set_content(completion("late"), "application/json");
  });
  auto c = config(server.endpoint());
  c.request_timeout = bb::Millis{100};
  c.retry.max_attempts = 2;
  const auto rec = bb::submit(prompt(), c);
  EXPECT_EQ(rec.error, bb::ResponseError::Transport);
  EXPECT_EQ(rec.attempt, 2);
}

TEST(Submit, UnreachableEndpointIsTransportError) {
  auto c = config("http://127.0.0.1:1/v1");
  c.retry.max_attempts = 2;
  const auto rec = bb::submit(prompt(), c);
  EXPECT_EQ(rec.error, bb::ResponseError::Transport);
}

TEST(RunBatch, RespectsConcurrencyBound) {
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --in_flight;
    res.set_content(completion("A. x"), "application/json");
  });
  std::vector<bb::Prompt> prompts;
  for (std::size_t i = 0; i < 24; ++i) prompts.push_back(prompt(i));
  const auto dir = fresh_dir("conc");
  bb::RunStore store(dir);
  const auto summary = bb::run_batch(prompts, {config(server.endpoint())}, 3, store, bb::make_http_responder());
  EXPECT_EQ(summary.submitted, 24u);
  EXPECT_EQ(summary.failed, 0u);
  EXPECT_LE(peak.load(), 3);
  EXPECT_GE(peak.load(), 2);
  EXPECT_EQ(store.size(), 24u);
  std::filesystem::remove_all(dir);
}

TEST(RunBatch, ZeroParallelismIsRejected) {
  const auto dir = fresh_dir("zero");
  bb::RunStore store(dir);
  EXPECT_THROW(bb::run_batch({prompt()}, {config("http://x")}, 0, store, bb::make_http_responder()),
               bb::ValidationError);
  std::filesystem::remove_all(dir);
}

TEST(RateLimiter, SpacesRequests) {
  bb::RateLimiter limiter(50.0);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 6; ++i) limiter.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(95));
  bb::RateLimiterRegistry reg;
  bb::ModelConfig c = config("http://a");
  EXPECT_EQ(reg.limiter_for(c), nullptr);
  c.rate_limit = 5;
  EXPECT_NE(reg.limiter_for(c), nullptr);
  EXPECT_EQ(reg.limiter_for(c), reg.limiter_for(c));
}

TEST(RunBatch, ResumeSubmitsOnlyWhatIsMissing) {
  std::vector<bb::Prompt> prompts;
  for (std::size_t i = 0; i < 100; ++i)
    for (int level = 1; level <= 5; ++level) prompts.push_back(prompt(i, level));
  ASSERT_EQ(prompts.size(), 500u);
  const auto cfg = config("http://unused");
  const auto dir = fresh_dir("resume");

  // First run: the connection drops after 200 answers.
  std::atomic<int> calls{0};
  bb::Responder flaky = [&](const bb::Prompt& p, const bb::ModelConfig& c) {
    bb::ResponseRecord r;
    r.prompt_ref = bb::ref_of(p);
    r.model_id = c.model_id;
    r.temperature = c.temperature;
    r.attempt = 1;
    if (++calls > 200) {
      r.error = bb::ResponseError::Transport;
      r.error_message = "connection reset";
    } else {
      r.response_text = "A. x";
    }
    return r;
  };
  {
    bb::RunStore store(dir);
    const auto s = bb::run_batch(prompts, {cfg}, 1, store, flaky);
    EXPECT_EQ(s.submitted, 500u);
    EXPECT_EQ(s.failed, 300u);
  }

  std::atomic<int> resumed{0};
  bb::Responder healthy = [&](const bb::Prompt& p, const bb::ModelConfig& c) {
    ++resumed;
    bb::ResponseRecord r;
    r.prompt_ref = bb::ref_of(p);
    r.model_id = c.model_id;
    r.temperature = c.temperature;
    r.response_text = "B. y";
    return r;
  };
  bb::RunStore store(dir);
  const auto s = bb::run_batch(prompts, {cfg}, 4, store, healthy);
  EXPECT_EQ(s.submitted, 300u);
  EXPECT_EQ(s.skipped, 200u);
  EXPECT_EQ(resumed.load(), 300);
  const auto records = store.records();
  ASSERT_EQ(records.size(), 500u);
  for (const auto& r : records) EXPECT_TRUE(r.ok());

  const auto again = bb::run_batch(prompts, {cfg}, 4, store, healthy);
  EXPECT_EQ(again.submitted, 0u);
  EXPECT_EQ(again.skipped, 500u);
  std::filesystem::remove_all(dir);
}
